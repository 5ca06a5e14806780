#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "milnorflow/cli_support.hpp"
#include "milnorflow/curve_factory.hpp"
#include "milnorflow/dynamics.hpp"
#include "milnorflow/errors.hpp"
#include "milnorflow/multicentre.hpp"
#include "milnorflow/verify.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace milnorflow;

namespace {

enum Exit { kOk = 0, kValidation = 1, kConstruction = 2, kVerification = 3 };

struct RunConfig {
    std::string lambda, u5, family = "sullivan", format = "csv", out = ".", only;
    double r = 0.5;
    std::uint64_t seed = 20240601;
    std::optional<double> tol_rel, tol_abs, tmax, h, g;
    int samples = 2048;
    bool inject_fault = false;
};

class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

IntegratorConfig integrator_from(const RunConfig& rc) {
    IntegratorConfig cfg;
    if (rc.tol_rel) cfg.rel_tol = *rc.tol_rel;
    if (rc.tol_abs) cfg.abs_tol = *rc.tol_abs;
    if (rc.tmax) cfg.t_max = *rc.tmax;
    try {
        cfg.validate();
    } catch (const DomainError& e) {
        throw ValidationError(e.what());
    }
    return cfg;
}

std::vector<double> grid_or(const std::string& text, const std::string& fallback) {
    try {
        return parse_grid(text.empty() ? fallback : text);
    } catch (const DomainError& e) {
        throw ValidationError(e.what());
    }
}

fs::path prepare_out(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path probe = fs::path(dir) / ".milnorflow_write_probe";
    std::ofstream f(probe);
    if (!f) throw ValidationError("output directory not writable: " + dir);
    f.close();
    fs::remove(probe, ec);
    return fs::path(dir);
}

std::string tag_of(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

void write_file(const fs::path& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << body;
}

int cmd_build_curve(const RunConfig& rc) {
    const auto lambdas = grid_or(rc.lambda, "");
    for (double lam : lambdas)
        if (!(lam >= kLambdaMin && lam <= kLambdaMax)) throw ValidationError("lambda out of supported range [0.5, 6]: " + format_g17(lam));
    if (rc.samples < 2) throw ValidationError("--samples must be at least 2");
    if (rc.h.has_value() != rc.g.has_value()) throw ValidationError("--trochoid-h and --trochoid-g must be given together");
    const fs::path out = prepare_out(rc.out);
    const std::string stamp = utc_timestamp();

    for (double lam : lambdas) {
        std::optional<TrochoidParams> ov;
        if (rc.h) {
            try {
                ov = TrochoidParams::make(lam, *rc.h, *rc.g);
            } catch (const DomainError& e) {
                throw ValidationError(e.what());
            }
        }
        const auto c = build_gamma(lam, ov);
        const auto diag = c->diagnostics();
        const auto seam = seam_crossing_residual(*c, 1e-5);
        json header = {
            {"lambda", lam},
            {"h", c->params().h},
            {"g", c->params().g},
            {"a", c->params().a},
            {"loops", c->loops()},
            {"parameter_period", c->period()},
            {"length", c->length()},
            {"integral_kg_ds", c->integral_kg_ds()},
            {"max_inv_kg", diag.max_inv_kg},
            {"min_abs_kg", diag.min_abs_kg},
            {"delta_theta", c->delta_theta()},
            {"seam", {{"position", seam.position}, {"tangent", seam.tangent}, {"curvature", seam.curvature}}},
            {"samples", rc.samples},
            {"columns", {"s", "t", "x", "y", "z", "kg"}},
        };
        std::vector<std::array<double, 6>> rows;
        rows.reserve(static_cast<std::size_t>(rc.samples));
        for (int i = 0; i < rc.samples; ++i) {
            const double s = c->length() * i / rc.samples;
            const double t = c->t_of_s(s);
            const Vec3 p = c->point(t);
            rows.push_back({s, t, p.x(), p.y(), p.z(), c->geodesic_curvature(t)});
        }
        const std::string base = "curve_lambda_" + tag_of(lam);
        if (rc.format == "json") {
            json doc = header;
            doc["generated_at"] = stamp;
            doc["data"] = rows;
            write_file(out / (base + ".json"), doc.dump(2) + "\n");
        } else {
            json h = header;
            h["generated_at"] = stamp;
            write_file(out / (base + ".json"), h.dump(2) + "\n");
            std::string body = "# milnorflow build-curve generated " + stamp + "\r\n";
            body += "s,t,x,y,z,kg\r\n";
            for (const auto& r : rows) {
                for (std::size_t k = 0; k < r.size(); ++k) body += (k ? "," : "") + format_g17(r[k]);
                body += "\r\n";
            }
            write_file(out / (base + ".csv"), body);
        }
        std::printf("lambda %s  length %s  period %s  max 1/|k_g| %s  -> %s\n", format_g17(lam).c_str(),
                    format_g17(c->length()).c_str(), format_g17(c->integral_kg_ds()).c_str(),
                    format_g17(diag.max_inv_kg).c_str(), (out / base).string().c_str());
    }
    return kOk;
}

int cmd_verify(const RunConfig& rc) {
    VerifyOptions opts;
    opts.only = split_list(rc.only);
    for (const auto& s : opts.only)
        if (std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
            throw ValidationError("unknown suite '" + s + "'");
    opts.fault = rc.inject_fault ? TransitionFault::SwapExponents : TransitionFault::None;
    opts.seed = rc.seed;
    opts.integrator = integrator_from(rc);
    const fs::path out = prepare_out(rc.out);

    const auto results = run_verification(opts);
    bool all = true;
    json checks = json::array();
    for (const auto& r : results) {
        all = all && r.passed;
        checks.push_back({{"suite", r.suite},
                          {"name", r.name},
                          {"passed", r.passed},
                          {"measured", std::isfinite(r.measured) ? json(r.measured) : json(nullptr)},
                          {"tolerance", r.tolerance},
                          {"detail", r.detail}});
        std::printf("%s  %-12s %-34s measured %-12.6g tolerance %-10.3g %s\n", r.passed ? "PASS" : "FAIL",
                    r.suite.c_str(), r.name.c_str(), r.measured, r.tolerance, r.detail.c_str());
    }
    json report = {{"generated_at", utc_timestamp()},
                   {"seed", rc.seed},
                   {"inject_fault", rc.inject_fault},
                   {"suites", opts.only.empty() ? json(suite_names()) : json(opts.only)},
                   {"passed", all},
                   {"checks", checks}};
    write_file(out / "verify_report.json", report.dump(2) + "\n");
    std::printf("%s: %zu checks, report %s\n", all ? "all checks passed" : "verification failures",
                results.size(), (out / "verify_report.json").string().c_str());
    return all ? kOk : kVerification;
}

int cmd_period_scan(const RunConfig& rc) {
    const IntegratorConfig cfg = integrator_from(rc);
    FieldFamily family;
    std::vector<double> grid;
    std::string param = "u5";
    if (rc.family == "sullivan") {
        param = "lambda";
        grid = grid_or(rc.lambda, "1,1.5,2,2.5");
        for (double x : grid)
            if (!(x >= kLambdaMin && x <= kLambdaMax)) throw ValidationError("lambda out of supported range [0.5, 6]: " + format_g17(x));
        family = sullivan_family();
    } else if (rc.family == "fibration" || rc.family == "multicentre" || rc.family == "hopf") {
        grid = grid_or(rc.u5, rc.family == "multicentre" ? "0,0.5,0.8,0.9" : "0,0.5,0.8");
        for (double x : grid)
            if (!(x >= -1.0 && x <= 1.0)) throw ValidationError("u5 out of range [-1, 1]: " + format_g17(x));
        if (rc.family == "multicentre") {
            if (!(rc.r > 0.0 && rc.r < 1.0)) throw ValidationError("--r must lie in (0, 1)");
            family = multicentre_family(rc.r);
        } else {
            family = rc.family == "hopf" ? hopf_family() : fibration_family();
        }
        const double scale = rc.family == "multicentre" ? 1.0 / rc.r : 1.0;
        if (rc.family != "hopf")
            for (double x : grid)
                if (std::abs(x) < 1.0 && lambda_of(x, scale) > kLambdaMax)
                    std::fprintf(stderr,
                                 "note: u5 = %s gives lambda = %.6g > 6; the field uses the periodic surrogate curve "
                                 "and a period beyond T_max is reported as a lower bound\n",
                                 format_g17(x).c_str(), lambda_of(x, scale));
    } else {
        throw ValidationError("unknown family '" + rc.family + "' (sullivan | fibration | multicentre | hopf)");
    }
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw ValidationError("grid must be strictly increasing");
    const fs::path out = prepare_out(rc.out);

    const PeriodScan scan = period_scan(family, grid, cfg);
    const std::string stamp = utc_timestamp();
    json rows = json::array();
    for (const auto& r : scan.rows) {
        rows.push_back({{param, r.param},
                        {"period_or_lower_bound", r.period},
                        {"closed", r.closed},
                        {"residual", r.residual},
                        {"steps", r.steps},
                        {"wall_time_s", r.wall_time_s},
                        {"error", r.error}});
        std::printf("%s %-22s %s %-24s residual %-10.3g steps %zu %s\n", param.c_str(), format_g17(r.param).c_str(),
                    r.closed ? "period     " : "lower bound", format_g17(r.period).c_str(), r.residual, r.steps,
                    r.error.c_str());
    }
    json meta = {{"generated_at", stamp},
                 {"family", scan.family},
                 {"parameter", param},
                 {"grid", grid},
                 {"tol_rel", cfg.rel_tol},
                 {"tol_abs", cfg.abs_tol},
                 {"t_max", cfg.t_max},
                 {"log_period_slope", scan.log_period_slope},
                 {"monotonicity_violations", scan.monotonicity_violations}};
    if (rc.family == "multicentre") meta["r"] = rc.r;
    meta["rows"] = rows;
    const std::string base = "scan_" + rc.family;
    write_file(out / (base + ".json"), meta.dump(2) + "\n");
    if (rc.format == "csv") {
        std::string body = "# milnorflow period-scan generated " + stamp + "\r\n";
        body += param + ",period_or_lower_bound,closed,residual,steps,error\r\n";
        for (const auto& r : scan.rows) {
            body += format_g17(r.param) + "," + format_g17(r.period) + "," + (r.closed ? "1" : "0") + "," +
                    format_g17(r.residual) + "," + std::to_string(r.steps) + "," + csv_field(r.error) + "\r\n";
        }
        write_file(out / (base + ".csv"), body);
    }
    std::printf("log-period slope %s, monotonicity violations %zu -> %s\n", format_g17(scan.log_period_slope).c_str(),
                scan.monotonicity_violations.size(), (out / base).string().c_str());
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"milnorflow: circle fibrations with unbounded periods"};
    app.require_subcommand(1);
    RunConfig rc;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--format", rc.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--out", rc.out, "Output directory");
        sub->add_option("--seed", rc.seed, "Seed for sampled checks");
        sub->add_option("--tol-rel", rc.tol_rel, "Integrator relative tolerance");
        sub->add_option("--tol-abs", rc.tol_abs, "Integrator absolute tolerance");
        sub->add_option("--tmax", rc.tmax, "Time budget T_max");
    };

    auto* build = app.add_subcommand("build-curve", "Build Gamma_lambda and write samples");
    common(build);
    build->add_option("--lambda", rc.lambda, "Grid of lambda values")->required();
    build->add_option("--samples", rc.samples, "Samples per curve, uniform in arc length");
    build->add_option("--trochoid-h", rc.h, "Override the trochoid h");
    build->add_option("--trochoid-g", rc.g, "Override the trochoid g");

    auto* verify = app.add_subcommand("verify", "Run the invariant suites");
    common(verify);
    verify->add_option("--only", rc.only, "Comma list of suites: geom, curve, sullivan, bundle, multicentre, dynamics");
    verify->add_flag("--inject-fault", rc.inject_fault, "Use the faulty transition (exponents swapped)");

    auto* scan = app.add_subcommand("period-scan", "Measure periods over a parameter grid");
    common(scan);
    scan->add_option("--family", rc.family, "sullivan | fibration | multicentre | hopf");
    scan->add_option("--lambda", rc.lambda, "Lambda grid (sullivan)");
    scan->add_option("--u5", rc.u5, "u5 grid (fibration, multicentre, hopf)");
    scan->add_option("--r", rc.r, "Sphere radius (multicentre)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kValidation;
    }

    try {
        if (*build) return cmd_build_curve(rc);
        if (*verify) return cmd_verify(rc);
        return cmd_period_scan(rc);
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kValidation;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kValidation;
    } catch (const ConstructionError& e) {
        std::fprintf(stderr, "construction error %s\n", e.what());
        return kConstruction;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kConstruction;
    }
}
