#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "bmo/algorithms.hpp"
#include "bmo/generate.hpp"
#include "bmo/io.hpp"
#include "bmo/maxsat.hpp"
#include "bmo/upgrade.hpp"

namespace {

constexpr int kExitOptimum = 0;
constexpr int kExitHardUnsat = 1;
constexpr int kExitInputError = 2;
constexpr int kExitTimeout = 3;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw bmo::Error("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw bmo::Error("cannot write '" + path + "'");
    out << text;
}

std::vector<bmo::BigInt> parse_weights(const std::string& spec) {
    std::vector<bmo::BigInt> weights;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos)
            throw bmo::Error("bad weight '" + item + "' (expected 'minimal' or w1,w2,...)");
        weights.emplace_back(item);
    }
    if (weights.empty()) throw bmo::Error("empty weight list");
    return weights;
}

bmo::Algorithm parse_algo(const std::string& name) {
    if (name == "mono") return bmo::Algorithm::Mono;
    if (name == "rsc") return bmo::Algorithm::Rsc;
    if (name == "ipb") return bmo::Algorithm::Ipb;
    if (name == "brute") return bmo::Algorithm::Brute;
    throw bmo::Error("unknown algorithm '" + name + "'");
}

struct RunReport {
    std::string instance;
    std::string algorithm;
    std::string status;
    std::vector<std::size_t> optima;
    bmo::BigInt falsified;
    bmo::BigInt objective;
    double seconds = 0.0;
    uint64_t sat_calls = 0;
    uint64_t conflicts = 0;
};

std::string optima_str(const std::vector<std::size_t>& u) {
    std::ostringstream os;
    os << "<";
    for (std::size_t i = 0; i < u.size(); ++i) os << (i ? "," : "") << u[i];
    os << ">";
    return os.str();
}

void print_report(const RunReport& r) {
    std::cout << "c instance " << r.instance << "\n"
              << "c algorithm " << r.algorithm << "\n"
              << "c status " << r.status << "\n";
    if (r.status == "OPTIMUM")
        std::cout << "c optima " << optima_str(r.optima) << "\n"
                  << "c objective " << r.objective << "\n";
    std::cout << "c seconds " << std::fixed << std::setprecision(3) << r.seconds << "\n"
              << "c sat_calls " << r.sat_calls << "\n"
              << "c conflicts " << r.conflicts << "\n";
    std::cout.unsetf(std::ios::fixed);
}

// per-iteration pseudo-Boolean renderings of the iterative algorithm:
// iteration i minimizes the level-i relaxation count subject to the
// settled counts of the levels above it
void dump_ipb_opb(const bmo::LeveledFormula& f, const std::vector<std::size_t>& optima,
                  const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const int m = f.num_levels();
    for (int i = m; i >= 1; --i) {
        std::ostringstream os;
        bmo::Var next_var = f.num_vars;
        std::vector<std::vector<bmo::Var>> ys(static_cast<std::size_t>(m) + 1);
        std::size_t constraints = f.hard.size();
        for (int j = m; j >= i; --j) {
            for (std::size_t k = 0; k < f.levels[static_cast<std::size_t>(j - 1)].clauses.size(); ++k)
                ys[static_cast<std::size_t>(j)].push_back(++next_var);
            constraints += f.levels[static_cast<std::size_t>(j - 1)].clauses.size();
            if (j > i) ++constraints;  // the settled-count equality
        }
        os << "* #variable= " << next_var << " #constraint= " << constraints << "\n";
        os << "min:";
        for (bmo::Var y : ys[static_cast<std::size_t>(i)]) os << " +1 x" << y;
        os << " ;\n";
        auto term = [&](bmo::Lit l) {
            os << "+1 " << (l.negated() ? "~x" : "x") << l.var() << " ";
        };
        for (const bmo::Clause& c : f.hard) {
            for (bmo::Lit l : c) term(l);
            os << ">= 1 ;\n";
        }
        for (int j = m; j >= i; --j) {
            const auto& level = f.levels[static_cast<std::size_t>(j - 1)];
            for (std::size_t k = 0; k < level.clauses.size(); ++k) {
                for (bmo::Lit l : level.clauses[k]) term(l);
                os << "+1 x" << ys[static_cast<std::size_t>(j)][k] << " >= 1 ;\n";
            }
        }
        for (int j = m; j > i; --j) {
            for (bmo::Var y : ys[static_cast<std::size_t>(j)]) os << "+1 x" << y << " ";
            os << "= " << optima[static_cast<std::size_t>(j - 1)] << " ;\n";
        }
        spill(dir + "/iteration-" + std::to_string(m - i + 1) + ".opb", os.str());
    }
}

int cmd_encode(const std::string& in, const std::string& format, const std::string& weights,
               std::string out) {
    bmo::pkg::PackageUniverse u = bmo::io::read_universe(slurp(in));
    bmo::pkg::UpgradeEncoding enc = weights == "minimal"
                                        ? bmo::pkg::encode_upgradeability(u)
                                        : bmo::pkg::encode_upgradeability(u, parse_weights(weights));
    std::string text =
        format == "opb" ? bmo::io::write_opb(enc.formula) : bmo::io::write_wcnf(enc.formula);
    if (out == "-")
        std::cout << text;
    else
        spill(out, text);
    return kExitOptimum;
}

int cmd_solve(const std::string& in, const std::string& algo_name, double timeout, bool stats,
              const std::string& model_out, const std::string& dump_opb) {
    bmo::Algorithm algo = parse_algo(algo_name);
    bmo::io::WcnfDocument doc = bmo::io::read_wcnf(slurp(in));

    auto t0 = std::chrono::steady_clock::now();
    bmo::BmoOptions opt;
    if (timeout > 0)
        opt.deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                std::chrono::duration<double>(timeout));

    std::optional<bmo::LeveledFormula> f;
    try {
        f = doc.to_leveled();
    } catch (const bmo::NotBmoError& e) {
        if (algo != bmo::Algorithm::Mono) {
            std::cerr << "error: not a BMO instance: " << e.what() << "\n";
            return kExitInputError;
        }
    }

    RunReport report;
    report.instance = in;
    report.algorithm = bmo::name_of(algo);
    double elapsed = 0.0;

    if (!f) {
        // non-BMO weighted WCNF: plain MaxSAT
        bmo::MaxSatInstance inst;
        inst.num_vars = doc.num_vars;
        for (const auto& wc : doc.clauses) {
            if (wc.hard)
                inst.hard.push_back(wc.clause);
            else
                inst.soft.emplace_back(wc.clause, wc.weight);
        }
        bmo::MaxSatOptions mo;
        mo.deadline = opt.deadline;
        bmo::BigInt last_printed = -1;
        mo.on_improve = [&](const bmo::BigInt& cost, const bmo::Model&) {
            if (last_printed < 0 || cost < last_printed) {
                std::cout << "o " << cost << std::endl;
                last_printed = cost;
            }
        };
        bmo::MaxSatResult r = bmo::solve_maxsat(inst, mo);
        elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.seconds = elapsed;
        report.sat_calls = r.sat_calls;
        report.conflicts = r.engine.conflicts;
        if (r.interrupted()) {
            report.status = "UNKNOWN";
            std::cout << "s UNKNOWN" << std::endl;
            if (stats) print_report(report);
            return kExitTimeout;
        }
        if (r.hard_unsat()) {
            report.status = "UNSATISFIABLE";
            std::cout << "s UNSATISFIABLE" << std::endl;
            if (stats) print_report(report);
            return kExitHardUnsat;
        }
        report.status = "OPTIMUM";
        report.falsified = r.falsified_weight;
        std::cout << "s OPTIMUM FOUND" << std::endl;
        std::string model_line = bmo::io::write_model(r.model);
        std::cout << model_line;
        if (!model_out.empty()) spill(model_out, model_line);
        if (stats) {
            std::cout << "c instance " << in << "\nc algorithm mono (plain maxsat)\n"
                      << "c status OPTIMUM\nc falsified " << r.falsified_weight << "\n"
                      << "c seconds " << std::fixed << std::setprecision(3) << elapsed << "\n"
                      << "c sat_calls " << r.sat_calls << "\nc conflicts " << r.engine.conflicts
                      << "\n";
            std::cout.unsetf(std::ios::fixed);
        }
        return kExitOptimum;
    }

    bmo::BigInt last_printed = -1;
    if (algo == bmo::Algorithm::Mono) {
        // original-scale costs as the incumbent improves
        opt.on_model = [&](const bmo::Model& m) {
            bmo::VerifyReport vr = bmo::verify_model(*f, m);
            bmo::BigInt cost = bmo::falsified_weight(*f, vr.falsified);
            if (last_printed < 0 || cost < last_printed) {
                std::cout << "o " << cost << std::endl;
                last_printed = cost;
            }
        };
    } else {
        // mid-run costs live in rescaled units; report level closures
        // as comments and leave the o line for the final recount
        opt.on_level_done = [&](int level, std::size_t count) {
            std::cout << "c level " << level << " optimum " << count << std::endl;
        };
    }

    bmo::BmoResult r;
    try {
        r = algo == bmo::Algorithm::Rsc   ? bmo::solve_rsc(*f, opt)
            : algo == bmo::Algorithm::Ipb ? bmo::solve_ipb(*f, opt)
            : algo == bmo::Algorithm::Mono
                ? bmo::solve_mono(*f, opt)
                : bmo::solve_brute(*f);
    } catch (const bmo::TooLargeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    report.seconds = elapsed;
    report.sat_calls = r.stats.sat_calls;
    report.conflicts = r.stats.conflicts;
    if (r.interrupted()) {
        report.status = "UNKNOWN";
        std::cout << "s UNKNOWN" << std::endl;
        if (stats) print_report(report);
        return kExitTimeout;
    }
    if (r.hard_unsat()) {
        report.status = "UNSATISFIABLE";
        std::cout << "s UNSATISFIABLE" << std::endl;
        if (stats) print_report(report);
        return kExitHardUnsat;
    }

    report.status = "OPTIMUM";
    report.optima = r.optima.falsified;
    report.falsified = bmo::falsified_weight(*f, r.optima.falsified);
    report.objective = r.optima.objective;
    bmo::BigInt final_cost = report.falsified;
    if (last_printed < 0 || final_cost < last_printed) std::cout << "o " << final_cost << std::endl;
    std::cout << "s OPTIMUM FOUND" << std::endl;
    std::string model_line = bmo::io::write_model(r.optima.model);
    std::cout << model_line;
    if (!model_out.empty()) spill(model_out, model_line);
    if (!dump_opb.empty()) {
        if (algo == bmo::Algorithm::Ipb)
            dump_ipb_opb(*f, r.optima.falsified, dump_opb);
        else
            std::cerr << "warning: --dump-opb applies to --algo ipb only, ignored\n";
    }
    if (stats) print_report(report);
    return kExitOptimum;
}

int cmd_gen(bmo::gen::GenConfig cfg, std::string out) {
    bmo::pkg::PackageUniverse u = bmo::gen::generate(cfg);
    if (out.empty())
        out = "i" + std::to_string(cfg.extra_installed) + "u" + std::to_string(cfg.request_size) +
              "-s" + std::to_string(cfg.seed) + ".pkg";
    std::string text = bmo::io::write_universe(u);
    if (out == "-") {
        std::cout << text;
    } else {
        spill(out, text);
        std::cout << out << "\n";
    }
    return kExitOptimum;
}

int cmd_verify(const std::string& wcnf_path, const std::string& model_path) {
    bmo::LeveledFormula f = bmo::io::read_wcnf(slurp(wcnf_path)).to_leveled();
    bmo::Model m = bmo::io::read_model(slurp(model_path), f.num_vars);
    bmo::VerifyReport vr = bmo::verify_model(f, m);
    for (std::size_t i = 0; i < vr.falsified.size(); ++i)
        std::cout << "c level " << i + 1 << " falsified " << vr.falsified[i] << "\n";
    std::cout << "o " << bmo::falsified_weight(f, vr.falsified) << "\n";
    if (!vr.hard_ok) {
        std::cout << "s HARD CLAUSE " << *vr.first_violated_hard << " VIOLATED\n";
        return kExitHardUnsat;
    }
    std::cout << "s VERIFIED\n";
    return kExitOptimum;
}

int cmd_bench(const std::vector<std::string>& paths, const std::string& algos_csv, double timeout,
              unsigned jobs, const std::string& csv_path) {
    std::vector<std::string> algos;
    {
        std::stringstream ss(algos_csv);
        std::string a;
        while (std::getline(ss, a, ',')) {
            parse_algo(a);
            algos.push_back(a);
        }
    }
    if (paths.empty()) {
        std::cerr << "warning: no instances\n";
        return kExitOptimum;
    }

    struct Task {
        std::size_t instance;
        std::size_t algo;
    };
    std::vector<Task> tasks;
    std::vector<std::optional<bmo::LeveledFormula>> formulas(paths.size());
    std::vector<std::string> load_errors(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        try {
            const std::string& p = paths[i];
            if (p.size() >= 5 && p.substr(p.size() - 5) == ".wcnf") {
                formulas[i] = bmo::io::read_wcnf(slurp(p)).to_leveled();
            } else {
                formulas[i] =
                    bmo::pkg::encode_upgradeability(bmo::io::read_universe(slurp(p))).formula;
            }
            for (std::size_t a = 0; a < algos.size(); ++a) tasks.push_back({i, a});
        } catch (const std::exception& e) {
            load_errors[i] = e.what();
        }
    }

    std::vector<RunReport> reports(paths.size() * algos.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            const Task& task = tasks[t];
            const bmo::LeveledFormula& f = *formulas[task.instance];
            RunReport& rep = reports[task.instance * algos.size() + task.algo];
            rep.instance = paths[task.instance];
            rep.algorithm = algos[task.algo];
            bmo::BmoOptions opt;
            auto t0 = std::chrono::steady_clock::now();
            if (timeout > 0)
                opt.deadline = t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                        std::chrono::duration<double>(timeout));
            try {
                bmo::Algorithm algo = parse_algo(algos[task.algo]);
                bmo::BmoResult r = algo == bmo::Algorithm::Rsc   ? bmo::solve_rsc(f, opt)
                                   : algo == bmo::Algorithm::Ipb ? bmo::solve_ipb(f, opt)
                                   : algo == bmo::Algorithm::Mono
                                       ? bmo::solve_mono(f, opt)
                                       : bmo::solve_brute(f);
                rep.seconds =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                rep.sat_calls = r.stats.sat_calls;
                rep.conflicts = r.stats.conflicts;
                if (r.optimum()) {
                    rep.status = "OPTIMUM";
                    rep.optima = r.optima.falsified;
                    rep.falsified = bmo::falsified_weight(f, r.optima.falsified);
                    rep.objective = r.optima.objective;
                } else if (r.hard_unsat()) {
                    rep.status = "UNSATISFIABLE";
                } else {
                    rep.status = "TIMEOUT";
                }
            } catch (const std::exception&) {
                rep.status = "ERROR";
            }
        }
    };
    if (jobs < 1) jobs = 1;
    {
        std::vector<std::thread> pool;
        for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
        worker();
        for (auto& th : pool) th.join();
    }

    auto cell = [&](const RunReport& r) -> std::string {
        if (r.status == "OPTIMUM") {
            std::ostringstream os;
            os << std::fixed << std::setprecision(2) << r.seconds;
            return os.str();
        }
        if (r.status == "TIMEOUT") {
            std::ostringstream os;
            os << ">" << timeout;
            return os.str();
        }
        if (r.status == "UNSATISFIABLE") return "unsat";
        return "err";
    };

    std::size_t name_w = 8;
    for (const auto& p : paths) name_w = std::max(name_w, p.size());
    std::cout << std::left << std::setw(static_cast<int>(name_w + 2)) << "instance";
    for (const auto& a : algos) std::cout << std::setw(12) << a;
    std::cout << "optima\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
        std::cout << std::setw(static_cast<int>(name_w + 2)) << paths[i];
        if (!load_errors[i].empty()) {
            std::cout << "load error: " << load_errors[i] << "\n";
            continue;
        }
        std::string optima;
        for (std::size_t a = 0; a < algos.size(); ++a) {
            const RunReport& r = reports[i * algos.size() + a];
            std::cout << std::setw(12) << cell(r);
            if (optima.empty() && r.status == "OPTIMUM") optima = optima_str(r.optima);
        }
        std::cout << optima << "\n";
    }

    if (!csv_path.empty()) {
        std::ostringstream csv;
        csv << "instance,algorithm,status,seconds,falsified,objective,sat_calls,conflicts\n";
        for (std::size_t i = 0; i < paths.size(); ++i)
            for (std::size_t a = 0; a < algos.size(); ++a) {
                const RunReport& r = reports[i * algos.size() + a];
                if (!load_errors[i].empty()) {
                    csv << paths[i] << "," << algos[a] << ",LOAD_ERROR,,,,,\n";
                    continue;
                }
                csv << r.instance << "," << r.algorithm << "," << r.status << "," << std::fixed
                    << std::setprecision(3) << r.seconds << "," << r.falsified << ","
                    << r.objective << "," << r.sat_calls << "," << r.conflicts << "\n";
            }
        spill(csv_path, csv.str());
    }
    return kExitOptimum;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boolean multilevel optimization over package upgradeability instances"};
    app.require_subcommand(1);

    auto* encode = app.add_subcommand("encode", "encode a package universe as WCNF or OPB");
    std::string enc_in, enc_format = "wcnf", enc_weights = "minimal", enc_out = "-";
    encode->add_option("universe", enc_in, "universe file")->required();
    encode->add_option("--format", enc_format, "wcnf or opb")
        ->check(CLI::IsMember({"wcnf", "opb"}));
    encode->add_option("--weights", enc_weights, "minimal or w1,w2,... (ascending per level)");
    encode->add_option("-o,--output", enc_out, "output path, - for stdout");

    auto* solve = app.add_subcommand("solve", "solve a WCNF instance");
    std::string solve_in, solve_algo = "rsc", solve_model_out, solve_dump_opb;
    double solve_timeout = 0.0;
    bool solve_stats = false;
    solve->add_option("wcnf", solve_in, "WCNF file")->required();
    solve->add_option("--algo", solve_algo, "mono, rsc, ipb, or brute")
        ->check(CLI::IsMember({"mono", "rsc", "ipb", "brute"}));
    solve->add_option("--timeout", solve_timeout, "wall clock limit in seconds");
    solve->add_flag("--stats", solve_stats, "print a c-prefixed run report");
    solve->add_option("--model-out", solve_model_out, "also write the v line to a file");
    solve->add_option("--dump-opb", solve_dump_opb,
                      "directory for per-iteration OPB files (ipb only)");

    auto* gen = app.add_subcommand("gen", "generate a random package universe");
    bmo::gen::GenConfig cfg;
    std::string gen_out;
    gen->add_option("-n,--packages", cfg.num_packages, "number of packages")->required();
    auto* base_opt = gen->add_option("--base-installed", cfg.base_installed, "installed base size");
    auto* extra_opt =
        gen->add_option("-x,--extra-installed", cfg.extra_installed, "extra installed packages");
    auto* req_opt = gen->add_option("-u,--request", cfg.request_size, "install request size");
    gen->add_option("--deps-mean", cfg.deps_per_package, "mean dependency disjunctions");
    gen->add_option("--width", cfg.disjunction_width, "max alternatives per disjunction");
    gen->add_option("--density", cfg.conflict_density, "conflict probability per package pair");
    gen->add_option("--seed", cfg.seed, "PRNG seed");
    gen->add_option("-o,--output", gen_out, "output path, - for stdout (default i<x>u<y>-s<seed>.pkg)");

    auto* verify = app.add_subcommand("verify", "recount a model against a WCNF instance");
    std::string ver_wcnf, ver_model;
    verify->add_option("wcnf", ver_wcnf, "WCNF file")->required();
    verify->add_option("model", ver_model, "model file with a v line")->required();

    auto* bench = app.add_subcommand("bench", "run algorithms across instances");
    std::vector<std::string> bench_paths;
    std::string bench_algos = "mono,rsc,ipb", bench_csv;
    double bench_timeout = 60.0;
    unsigned bench_jobs = 1;
    bench->add_option("instances", bench_paths, "universe or WCNF files");
    bench->add_option("--algos", bench_algos, "comma list of mono,rsc,ipb,brute");
    bench->add_option("--timeout", bench_timeout, "per-run limit in seconds");
    bench->add_option("--jobs", bench_jobs, "parallel workers");
    bench->add_option("--csv", bench_csv, "CSV sidecar path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*encode) return cmd_encode(enc_in, enc_format, enc_weights, enc_out);
        if (*solve)
            return cmd_solve(solve_in, solve_algo, solve_timeout, solve_stats, solve_model_out,
                             solve_dump_opb);
        if (*gen) {
            bmo::gen::GenConfig scaled = bmo::gen::GenConfig::scaled(cfg.num_packages, cfg.seed);
            if (*base_opt) scaled.base_installed = cfg.base_installed;
            if (*extra_opt) scaled.extra_installed = cfg.extra_installed;
            if (*req_opt) scaled.request_size = cfg.request_size;
            scaled.deps_per_package = cfg.deps_per_package;
            scaled.disjunction_width = cfg.disjunction_width;
            scaled.conflict_density = cfg.conflict_density;
            return cmd_gen(scaled, gen_out);
        }
        if (*verify) return cmd_verify(ver_wcnf, ver_model);
        if (*bench) return cmd_bench(bench_paths, bench_algos, bench_timeout, bench_jobs, bench_csv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
