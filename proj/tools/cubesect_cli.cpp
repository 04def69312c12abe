#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cubesect/cubesect.hpp"

using namespace cubesect;

namespace {

enum Exit { exit_pass = 0, exit_fail = 1, exit_usage = 2 };

struct Common {
    unsigned threads = 0;
    std::string report_path;
};

struct DirectionArgs {
    std::vector<double> a;
    std::size_t diag = 0;
};

void add_direction(CLI::App* sub, DirectionArgs& d) {
    auto* a = sub->add_option("--a", d.a, "normal coordinates, comma separated")->delimiter(',');
    auto* g = sub->add_option("--diag", d.diag, "diagonal normal in dimension n")->check(CLI::PositiveNumber);
    a->excludes(g);
}

Direction make_direction(const DirectionArgs& d) {
    if (d.diag > 0) return diagonal_direction(d.diag);
    if (d.a.empty()) throw CLI::ValidationError("direction", "one of --a or --diag is required");
    return normalize_direction(d.a);
}

std::string describe(const DirectionArgs& d) {
    if (d.diag > 0) return "diag-" + std::to_string(d.diag);
    std::string s;
    for (double x : d.a) s += (s.empty() ? "" : ",") + format_number(x);
    return s;
}

std::uint64_t sample_count(double s) {
    if (!(s >= 1.0) || s > 1e12 || s != std::floor(s)) throw CLI::ValidationError("--samples", "must be a whole number >= 1");
    return static_cast<std::uint64_t>(s);
}

FieldCase parse_field(const std::string& f) { return field_params(f == "real" ? Field::Real : Field::Complex); }

int finish(RunReport& r, const Common& c, std::chrono::steady_clock::time_point start) {
    r.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    print_report(std::cout, r);
    if (!c.report_path.empty()) {
        std::ofstream os(c.report_path);
        if (!os) throw std::runtime_error("cannot open " + c.report_path);
        os << to_json(r).dump(2) << '\n';
    }
    return r.passed ? exit_pass : exit_fail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyperplane sections of the cube and polydisc"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--threads", common.threads, "worker threads for sampling (default: $CUBESECT_THREADS or 1)");
    app.add_option("--report", common.report_path, "write a JSON run report");

    // section
    auto* section = app.add_subcommand("section", "volume of one section");
    std::string sec_field = "real", sec_method = "quad";
    DirectionArgs sec_dir;
    double sec_t = 0.0, sec_samples = 1e6, sec_tol = 1e-10;
    std::uint64_t sec_seed = McConfig{}.seed;
    section->add_option("--field", sec_field)->check(CLI::IsMember({"real", "complex"}));
    add_direction(section, sec_dir);
    section->add_option("--t", sec_t, "distance parameter")->required();
    section->add_option("--method", sec_method)->check(CLI::IsMember({"quad", "mc", "both"}));
    section->add_option("--samples", sec_samples);
    section->add_option("--seed", sec_seed);
    section->add_option("--tol", sec_tol);

    // certify
    auto* certify = app.add_subcommand("certify", "assemble and check the lower-bound chain");
    std::string cert_field = "both", cert_json;
    certify->add_option("--field", cert_field)->check(CLI::IsMember({"real", "complex", "both"}));
    certify->add_option("--emit-json", cert_json, "write certificates as JSON");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "section volume over a grid of t, as CSV");
    std::string sw_field = "real", sw_method = "quad", sw_csv;
    DirectionArgs sw_dir;
    double sw_from = 0.0, sw_to = 1.0, sw_step = 0.1, sw_samples = 1e6;
    std::uint64_t sw_seed = McConfig{}.seed;
    sweep->add_option("--field", sw_field)->check(CLI::IsMember({"real", "complex"}));
    add_direction(sweep, sw_dir);
    sweep->add_option("--t-from", sw_from);
    sweep->add_option("--t-to", sw_to);
    sweep->add_option("--t-step", sw_step)->check(CLI::PositiveNumber);
    sweep->add_option("--method", sw_method)->check(CLI::IsMember({"quad", "mc"}));
    sweep->add_option("--samples", sw_samples);
    sweep->add_option("--seed", sw_seed);
    sweep->add_option("--csv", sw_csv, "output file (default stdout)");

    // multidim
    auto* multidim = app.add_subcommand("multidim", "codimension-d sections");
    int md_n = 4, md_d = 2, md_trials = 100;
    double md_samples = 1e6;
    std::uint64_t md_seed = McConfig{}.seed;
    std::string md_mode = "bracket";
    multidim->add_option("--n", md_n)->check(CLI::Range(2, 12));
    multidim->add_option("--d", md_d)->check(CLI::Range(1, 3));
    multidim->add_option("--trials", md_trials)->check(CLI::PositiveNumber);
    multidim->add_option("--samples", md_samples);
    multidim->add_option("--seed", md_seed);
    multidim->add_option("--mode", md_mode)->check(CLI::IsMember({"empirical", "bracket", "decomposition"}));

    // tail
    auto* tail = app.add_subcommand("tail", "tail bound for |sum a_j U_j| against sampling");
    std::string tl_field = "real";
    DirectionArgs tl_dir;
    std::vector<double> tl_t{1.2, 1.5, 2.0};
    double tl_samples = 1e6;
    std::uint64_t tl_seed = McConfig{}.seed;
    tail->add_option("--field", tl_field)->check(CLI::IsMember({"real", "complex"}));
    add_direction(tail, tl_dir);
    tail->add_option("--t", tl_t, "comma separated thresholds > 1")->delimiter(',');
    tail->add_option("--samples", tl_samples);
    tail->add_option("--seed", tl_seed);

    // asymptotics
    auto* asym = app.add_subcommand("asymptotics", "diagonal sections at t = 1 as n grows");
    std::string as_field = "real", as_csv;
    int as_max = 50;
    double as_tol = 0.03;
    asym->add_option("--field", as_field)->check(CLI::IsMember({"real", "complex"}));
    asym->add_option("--n-max", as_max)->check(CLI::Range(2, 2000));
    asym->add_option("--limit-tol", as_tol);
    asym->add_option("--csv", as_csv, "write n,volume rows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_pass : exit_usage;
    }

    const auto start = std::chrono::steady_clock::now();
    RunReport r;
    try {
        if (section->parsed()) {
            r.command = "section";
            const auto field = parse_field(sec_field);
            const auto dir = make_direction(sec_dir);
            McConfig mc;
            mc.samples = sample_count(sec_samples);
            mc.seed = sec_seed;
            mc.threads = common.threads;
            QuadratureConfig qc;
            qc.abs_tol = sec_tol;
            r.inputs = {{"field", sec_field}, {"direction", describe(sec_dir)}, {"t", sec_t},
                        {"method", sec_method}, {"samples", mc.samples}, {"tol", sec_tol}};
            r.seed = sec_seed;
            const SectionQuery q(dir, sec_t, field);
            double quad = 0.0;
            if (sec_method != "mc") {
                const auto rep = section_volume_report(q, qc);
                quad = rep.value;
                r.add("volume_quad", rep.value, rep.error_estimate);
                r.inputs["tail"] = to_string(rep.tail);
            }
            if (sec_method != "quad") {
                const auto e = estimate_section_volume(q, mc);
                r.add("volume_mc", e.value, e.std_error);
                if (sec_method == "both") {
                    const double diff = std::abs(e.value - quad);
                    r.add("discrepancy", diff);
                    if (diff > 3.0 * e.std_error + 1e-6) r.fail("quadrature and sampling differ by more than 3 sigma");
                }
            }
            r.add("kk_upper_bound", kk_upper_bound(sec_t, field));
            return finish(r, common, start);
        }

        if (certify->parsed()) {
            r.command = "certify";
            r.inputs = {{"field", cert_field}};
            nlohmann::ordered_json certs = nlohmann::ordered_json::array();
            for (Field f : {Field::Real, Field::Complex}) {
                if (cert_field != "both" && cert_field != to_string(f)) continue;
                const std::string tag = to_string(f);
                const double required = f == Field::Real ? 0.06011 : 0.03789;
                try {
                    const auto c = theorem1_certificate(field_params(f));
                    std::cout << tag << " (k = " << c.field.k << ")\n";
                    for (const auto& l : c.chain)
                        std::cout << "  " << (l.holds() ? "ok  " : "FAIL") << ' ' << l.name << " = "
                                  << format_number(l.value) << "   [" << l.inequality << "]\n";
                    r.add(tag + ".p_lower", c.p_lower.value);
                    r.add(tag + ".lambda_star", *c.p_lower.lambda_star);
                    r.add(tag + ".threshold", c.threshold);
                    r.add(tag + ".final_bound", c.final_bound);
                    if (!(c.final_bound > required)) r.fail(tag + ": final bound not above " + format_number(required));
                    certs.push_back(to_json(c));
                } catch (const certificate_error& e) {
                    r.fail(tag + ": " + e.what());
                }
            }
            if (!cert_json.empty()) {
                std::ofstream os(cert_json);
                if (!os) throw std::runtime_error("cannot open " + cert_json);
                os << certs.dump(2) << '\n';
            }
            return finish(r, common, start);
        }

        if (sweep->parsed()) {
            r.command = "sweep";
            const auto field = parse_field(sw_field);
            const auto dir = make_direction(sw_dir);
            if (sw_to < sw_from) throw CLI::ValidationError("--t-to", "grid is empty");
            McConfig mc;
            mc.samples = sample_count(sw_samples);
            mc.seed = sw_seed;
            mc.threads = common.threads;
            r.inputs = {{"field", sw_field}, {"direction", describe(sw_dir)}, {"t_from", sw_from},
                        {"t_to", sw_to},     {"t_step", sw_step},            {"method", sw_method}};
            r.seed = sw_seed;
            std::vector<SweepRow> rows;
            const long points = std::lround(std::floor((sw_to - sw_from) / sw_step + 1e-9)) + 1;
            for (long i = 0; i < points; ++i) {
                const double t = sw_from + static_cast<double>(i) * sw_step;
                const SectionQuery q(dir, t, field);
                SweepRow row{t, 0.0, 0.0, kk_upper_bound(t, field)};
                if (sw_method == "quad") {
                    row.volume = section_volume(q);
                } else {
                    const auto e = estimate_section_volume(q, mc);
                    row.volume = e.value;
                    row.std_error = e.std_error;
                }
                if (row.volume > row.upper_bound + 4.0 * row.std_error + 1e-8)
                    r.fail("volume above the upper bound at t = " + format_number(t));
                rows.push_back(row);
            }
            r.add("points", static_cast<double>(rows.size()));
            if (sw_csv.empty()) {
                write_sweep_csv(std::cout, rows);
            } else {
                std::ofstream os(sw_csv);
                if (!os) throw std::runtime_error("cannot open " + sw_csv);
                write_sweep_csv(os, rows);
            }
            return finish(r, common, start);
        }

        if (multidim->parsed()) {
            r.command = "multidim";
            if (md_d >= md_n) throw CLI::ValidationError("--d", "need d < n");
            McConfig mc;
            mc.samples = sample_count(md_samples);
            mc.seed = md_seed;
            mc.threads = common.threads;
            r.inputs = {{"n", md_n}, {"d", md_d}, {"trials", md_trials}, {"samples", mc.samples}, {"mode", md_mode}};
            r.seed = md_seed;
            Rng rng = chunk_rng(md_seed, 0xC11, 0);
            if (md_mode == "empirical") {
                const auto rep = theorem11_empirical(md_n, md_d, md_trials, mc);
                r.add("min_volume", rep.min_volume, rep.min_std_error);
                if (!rep.positive) r.fail("minimum not positive beyond noise");
            } else if (md_mode == "bracket") {
                const double rad = default_density_radius(md_d);
                const double lo = std::pow(1.0 - 2.0 * rad, md_n - md_d), hi = std::pow(2.0, 0.5 * md_d);
                for (int i = 0; i < md_trials; ++i) {
                    const auto f = random_frame(md_n, md_d, rng);
                    McConfig c = mc;
                    c.seed = md_seed + static_cast<std::uint64_t>(i);
                    const auto e = density_mc(AffineSectionQuery(f, Eigen::VectorXd::Zero(md_d)), rad, c);
                    r.add("central_volume[" + std::to_string(i) + "]", e.estimate.value, e.estimate.std_error);
                    if (e.estimate.value + 4 * e.estimate.std_error < lo || e.estimate.value - 4 * e.estimate.std_error > hi)
                        r.fail("central section " + std::to_string(i) + " outside [1, 2^(d/2)] beyond bias and noise");
                }
                r.add("lower_with_bias", lo);
                r.add("upper", hi);
            } else {
                if (md_d > 2) throw CLI::ValidationError("--d", "decomposition needs d <= 2");
                for (int i = 0; i < md_trials; ++i) {
                    const auto f = random_frame(md_n, md_d, rng);
                    const auto c = check_lambda_identity(f);
                    r.add("residual[" + std::to_string(i) + "]", c.residual);
                    if (c.residual > 1e-8) r.fail("identity residual above 1e-8 for frame " + std::to_string(i));
                }
            }
            return finish(r, common, start);
        }

        if (tail->parsed()) {
            r.command = "tail";
            const auto field = parse_field(tl_field);
            const auto dir = make_direction(tl_dir);
            McConfig mc;
            mc.samples = sample_count(tl_samples);
            mc.seed = tl_seed;
            mc.threads = common.threads;
            r.inputs = {{"field", tl_field}, {"direction", describe(tl_dir)}, {"t", tl_t}, {"samples", mc.samples}};
            r.seed = tl_seed;
            for (double t : tl_t) {
                const double b = tail_bound(t, field.k);
                const auto e = estimate_exceed_prob(dir, t, field.k, mc);
                r.add("bound[t=" + format_number(t) + "]", b);
                r.add("empirical[t=" + format_number(t) + "]", e.value, e.std_error);
                if (e.value > b + 4 * e.std_error) r.fail("empirical tail above bound at t = " + format_number(t));
            }
            return finish(r, common, start);
        }

        if (asym->parsed()) {
            r.command = "asymptotics";
            const auto field = parse_field(as_field);
            r.inputs = {{"field", as_field}, {"n_max", as_max}, {"limit_tol", as_tol}};
            const double limit = diagonal_limit(field);
            std::ofstream csv;
            if (!as_csv.empty()) {
                csv.open(as_csv);
                if (!csv) throw std::runtime_error("cannot open " + as_csv);
                csv << "n,volume\n";
            }
            double prev = std::numeric_limits<double>::infinity(), last = 0.0;
            for (int n = 2; n <= as_max; ++n) {
                last = section_volume(SectionQuery(diagonal_direction(static_cast<std::size_t>(n)), 1.0, field));
                if (csv.is_open()) csv << n << ',' << format_number(last) << '\n';
                if (!(last < prev)) r.fail("sequence not decreasing at n = " + std::to_string(n));
                prev = last;
            }
            r.add("volume_at_n_max", last);
            r.add("limit", limit);
            if (std::abs(last - limit) > as_tol) r.fail("last value not within limit-tol of the limit");
            return finish(r, common, start);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    } catch (const invalid_input& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        r.fail(e.what());
        try {
            return finish(r, common, start);
        } catch (const std::exception&) {
            return exit_fail;
        }
    }
    return exit_usage;
}
