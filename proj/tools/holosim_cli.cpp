// command line front end: simulate, replay the built-in reference scenario
// against its golden tables, analyze holon timelines, and evaluate the
// structure-probability formulas with a Monte Carlo cross-check.

#include "holosim/engine.hpp"
#include "holosim/error.hpp"
#include "holosim/holarchy.hpp"
#include "holosim/model.hpp"
#include "holosim/probability.hpp"
#include "holosim/scenario.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace holosim;

// 0 ok, 1 input, 2 engine, 3 golden mismatch, 64 usage
int exit_for(const error& e) {
    switch (e.kind) {
        case errc::io_error:
        case errc::parse_error:
            return 1;
        case errc::golden_mismatch:
            return 3;
        case errc::domain_error:
        case errc::out_of_range:
            return 64;
        default:
            return 2;
    }
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io_error, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(errc::io_error, "cannot write " + path);
    out << text;
    if (!out) fail(errc::io_error, "short write to " + path);
}

void emit(const std::string& out, const std::string& text) {
    if (out == "-")
        std::cout << text;
    else
        spill(out, text);
}

std::vector<std::string> csv_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

// human-readable first-difference report; returns 0/3 like the process will
int report_table(const std::string& name, const std::string& golden,
                 const std::string& produced) {
    auto d = compare_csv(golden, produced);
    if (d.ok) {
        std::cout << name << ": match\n";
        return 0;
    }
    std::cerr << name << ": first difference at line " << d.line << "\n";
    if (d.expected != "<eof>" && d.actual != "<eof>" && d.line >= 2) {
        auto header = csv_fields(golden.substr(0, golden.find('\n')));
        auto want = csv_fields(d.expected);
        auto got = csv_fields(d.actual);
        for (std::size_t i = 0; i < want.size() && i < got.size(); ++i) {
            if (want[i] == got[i]) continue;
            std::cerr << "  tick " << (d.line - 1) << " column "
                      << (i < header.size() ? header[i] : std::to_string(i))
                      << ": expected " << want[i] << ", got " << got[i] << "\n";
            break;
        }
    }
    std::cerr << "  expected: " << d.expected << "\n";
    std::cerr << "  actual:   " << d.actual << "\n";
    return 3;
}

std::string decimal(const bigrat& v) {
    return format_double(v.convert_to<double>());
}

struct sigma_verdict {
    double sigmas = 0.0;
    bool pass = true;
};

sigma_verdict three_sigma(double closed, const mc_result& mc) {
    sigma_verdict v;
    double diff = std::fabs(mc.estimate - closed);
    if (mc.stderr_ == 0.0) {
        v.sigmas = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    } else {
        v.sigmas = diff / mc.stderr_;
    }
    v.pass = v.sigmas <= 3.0;
    return v;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic peer fusion simulator and analyzers"};
    app.require_subcommand(1);

    // run
    auto* c_run = app.add_subcommand("run", "simulate a scenario and write its trace");
    std::string run_scn, run_format = "jsonl", run_out = "-";
    bool run_builtin = false;
    std::uint64_t run_seed = 0;
    long long run_horizon = 0;
    c_run->add_option("--scenario", run_scn, "scenario file");
    c_run->add_flag("--paper", run_builtin, "use the built-in reference scenario");
    auto* run_seed_opt = c_run->add_option("--seed", run_seed, "override the seed");
    auto* run_hor_opt = c_run->add_option("--horizon", run_horizon, "override the horizon");
    c_run->add_option("--format", run_format, "jsonl or csv")
        ->check(CLI::IsMember({"jsonl", "csv"}));
    c_run->add_option("--out", run_out, "output path, - for stdout");

    // replay
    auto* c_replay = app.add_subcommand(
        "replay", "re-simulate the built-in scenario and diff its tables");
    std::string rp_tables = "all", rp_out;
    c_replay->add_option("--tables", rp_tables, "best0, best, remaining or all")
        ->check(CLI::IsMember({"best0", "best", "remaining", "all"}));
    c_replay->add_option("--out", rp_out, "also write the produced tables here");

    // holons
    auto* c_holons = app.add_subcommand("holons", "print the holon timeline of a trace");
    std::string ho_trace;
    bool ho_builtin = false;
    long long ho_k = 1;
    c_holons->add_option("--trace", ho_trace, "trace file (jsonl)");
    c_holons->add_flag("--paper", ho_builtin, "use the built-in reference scenario");
    c_holons->add_option("--k", ho_k, "favorite-set size for graph edges");

    // prob
    auto* c_prob = app.add_subcommand("prob", "closed-form structure probabilities");
    long long pr_n = 0, pr_c = 1, pr_k = 1;
    c_prob->add_option("--n", pr_n, "peer count")->required();
    c_prob->add_option("--c", pr_c, "interactions before the favorite choice");
    c_prob->add_option("--k", pr_k, "favorite slots");

    // mc
    auto* c_mc = app.add_subcommand("mc", "Monte Carlo cross-check of the closed forms");
    long long mc_n = 0, mc_c = 1, mc_k = 1, mc_trials = 100000;
    std::uint64_t mc_seed = 1;
    c_mc->add_option("--n", mc_n, "peer count")->required();
    c_mc->add_option("--c", mc_c, "interactions before the favorite choice");
    c_mc->add_option("--k", mc_k, "favorite slots");
    c_mc->add_option("--trials", mc_trials, "trial count");
    c_mc->add_option("--seed", mc_seed, "master seed");

    // export
    auto* c_export = app.add_subcommand("export", "write the table projections as csv files");
    std::string ex_scn, ex_out, ex_tables = "all";
    bool ex_builtin = false;
    c_export->add_option("--scenario", ex_scn, "scenario file");
    c_export->add_flag("--paper", ex_builtin, "use the built-in reference scenario");
    c_export->add_option("--tables", ex_tables, "best0, best, remaining or all")
        ->check(CLI::IsMember({"best0", "best", "remaining", "all"}));
    c_export->add_option("--out", ex_out, "output path prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 64;
    }

    try {
        if (*c_run) {
            if (run_builtin == !run_scn.empty()) {
                std::cerr << "run: give exactly one of --scenario and --paper\n";
                return 64;
            }
            scenario scn = run_builtin ? paper_example() : parse_scenario(slurp(run_scn));
            sim_config cfg = scn.cfg;
            if (*run_seed_opt) cfg.seed = run_seed;
            if (*run_hor_opt) cfg.horizon = run_horizon;
            auto tr = run(scn, cfg);
            emit(run_out, run_format == "jsonl" ? serialize_trace(tr)
                                                : export_tables(tr, 1, tr.horizon));
            return 0;
        }

        if (*c_replay) {
            auto tr = run(paper_example());
            std::string best0 = csv_best0(tr, 1, tr.horizon);
            std::string best = csv_best(tr, 1, tr.horizon);
            std::string remaining = csv_remaining(tr, 1, tr.horizon);
            if (!rp_out.empty()) {
                std::string all = "[best0]\n" + best0 + "[best]\n" + best +
                                  "[remaining]\n" + remaining;
                spill(rp_out, all);
            }
            int rc = 0;
            if (rp_tables == "best0" || rp_tables == "all")
                rc = std::max(rc, report_table("best0", golden_best0_csv(), best0));
            if (rp_tables == "best" || rp_tables == "all")
                rc = std::max(rc, report_table("best", golden_best_csv(), best));
            if (rp_tables == "remaining" || rp_tables == "all")
                rc = std::max(rc, report_table("remaining", golden_remaining_csv(),
                                               remaining));
            return rc;
        }

        if (*c_holons) {
            if (ho_k <= 0) {
                std::cerr << "holons: --k must be at least 1\n";
                return 64;
            }
            if (ho_builtin == !ho_trace.empty()) {
                std::cerr << "holons: give exactly one of --trace and --paper\n";
                return 64;
            }
            event_trace tr = ho_builtin ? run(paper_example())
                                        : parse_trace(slurp(ho_trace));
            auto tl = holon_timeline(tr, ho_k);
            for (const auto& e : tl)
                std::cout << e.t << "," << (e.emerged ? "Emerged" : "Dissolved")
                          << "," << e.head << "\n";
            if (ho_builtin) {
                auto want = golden_timeline();
                bool same = tl.size() == want.size();
                for (std::size_t i = 0; same && i < tl.size(); ++i)
                    same = tl[i].t == want[i].t && tl[i].emerged == want[i].emerged &&
                           tl[i].head == want[i].head;
                if (!same) {
                    std::cerr << "holons: timeline differs from the reference\n";
                    return 3;
                }
            }
            return 0;
        }

        if (*c_prob) {
            auto fav = p_favorite(pr_n, pr_c);
            auto tri = p_triple(pr_n, pr_c, pr_k);
            auto any = p_any_triple(pr_n, pr_c, pr_k);
            auto bound = p_bound(pr_n, pr_c, pr_k);
            std::cout << "params: n=" << pr_n << " c=" << pr_c << " k=" << pr_k << "\n";
            std::cout << "favorite     exact=" << fav << " decimal=" << decimal(fav) << "\n";
            std::cout << "triple       exact=" << tri << " decimal=" << decimal(tri) << "\n";
            std::cout << "any_triple   exact=" << any.value
                      << " decimal=" << decimal(any.value)
                      << " exceeds_one=" << (any.exceeds_one ? "yes" : "no") << "\n";
            std::cout << "bound_middle exact=" << bound.middle
                      << " decimal=" << decimal(bound.middle) << "\n";
            std::cout << "bound_approx form=" << bound.approx_form
                      << " decimal=" << decimal(bound.approx) << "\n";
            return 0;
        }

        if (*c_mc) {
            double fav_closed = p_favorite(mc_n, mc_c).convert_to<double>();
            double tri_closed = p_triple(mc_n, mc_c, mc_k).convert_to<double>();
            auto fav = mc_favorite(mc_n, mc_c, mc_trials, mc_seed);
            auto tri = mc_triple(mc_n, mc_c, mc_k, mc_trials, mc_seed);
            auto vf = three_sigma(fav_closed, fav);
            auto vt = three_sigma(tri_closed, tri);
            std::cout << "params: n=" << mc_n << " c=" << mc_c << " k=" << mc_k
                      << " trials=" << mc_trials << " seed=" << mc_seed << "\n";
            std::cout << "favorite closed=" << format_double(fav_closed)
                      << " estimate=" << format_double(fav.estimate)
                      << " stderr=" << format_double(fav.stderr_)
                      << " sigmas=" << format_double(vf.sigmas)
                      << (vf.pass ? " PASS" : " FAIL") << "\n";
            std::cout << "triple   closed=" << format_double(tri_closed)
                      << " estimate=" << format_double(tri.estimate)
                      << " stderr=" << format_double(tri.stderr_)
                      << " sigmas=" << format_double(vt.sigmas)
                      << (vt.pass ? " PASS" : " FAIL") << "\n";
            bool pass = vf.pass && vt.pass;
            std::cout << "verdict: " << (pass ? "PASS" : "FAIL") << "\n";
            return pass ? 0 : 3;
        }

        if (*c_export) {
            if (ex_builtin == !ex_scn.empty()) {
                std::cerr << "export: give exactly one of --scenario and --paper\n";
                return 64;
            }
            scenario scn = ex_builtin ? paper_example() : parse_scenario(slurp(ex_scn));
            auto tr = run(scn);
            if (ex_tables == "best0" || ex_tables == "all")
                spill(ex_out + "_best0.csv", csv_best0(tr, 1, tr.horizon));
            if (ex_tables == "best" || ex_tables == "all")
                spill(ex_out + "_best.csv", csv_best(tr, 1, tr.horizon));
            if (ex_tables == "remaining" || ex_tables == "all")
                spill(ex_out + "_remaining.csv", csv_remaining(tr, 1, tr.horizon));
            return 0;
        }
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_for(e);
    }
    return 64;
}
