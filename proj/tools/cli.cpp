#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdl/counterexample.hpp"
#include "hdl/errors.hpp"
#include "hdl/forms.hpp"
#include "hdl/iterlog.hpp"
#include "hdl/potential.hpp"
#include "hdl/singular_ode.hpp"
#include "hdl/transform.hpp"

using json = nlohmann::ordered_json;
using namespace hdl;
using potential::PotentialSpec;

namespace {

struct Config {
    double a = 5.0;
    double trunc_tol = 1e-14;
    double grid_min = 1e-6;
    double grid_max = 1e2;
    int ppd = 256;
    double tol = 1e-8;
    std::string out;
    std::string format = "csv";
    std::uint64_t seed = 42;
    std::string potential = "w1";
};

// contract violation: reported as a failure record, exit 1
struct Violation {
    std::string what;
    json detail;
};

iterlog::LogTowerParams params(const Config& c) {
    iterlog::LogTowerParams p;
    p.a = c.a;
    p.trunc_tol = c.trunc_tol;
    p.validate();
    return p;
}

std::vector<double> grid(const Config& c) {
    if (!(c.grid_min > 0.0) || !(c.grid_min < c.grid_max)) throw GridError("grid min must be positive and below grid max");
    if (c.ppd < 16) throw GridError("points per decade must be >= 16");
    return log_grid(c.grid_min, c.grid_max, c.ppd);
}

PotentialSpec make_potential(const std::string& name, const iterlog::LogTowerParams& p) {
    if (name == "one") return PotentialSpec::constant(1.0);
    if (name == "winf") return PotentialSpec::w_infinity(p);
    if (name == "wbar") return PotentialSpec::w_bar(p);
    if (name == "w1") return PotentialSpec::w1(p);
    if (name == "w2") return PotentialSpec::w2();
    if (name == "w3") return PotentialSpec::make_w3(p);
    if (name == "2s")
        return PotentialSpec::custom("2s", [](double s) { return 2.0 * s; }, potential::Tail::linear(2.0, 0.0));
    throw DomainError("unknown potential '" + name + "'");
}

unsigned thread_cap() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("HDL_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) n = std::min<unsigned>(n, unsigned(v));
    }
    return n;
}

template <class F>
void parallel_for(std::size_t count, F&& body) {
    unsigned nt = std::min<std::size_t>(thread_cap(), std::max<std::size_t>(count, 1));
    if (nt <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nt; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next++) < count;) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lk(mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

class Table {
public:
    explicit Table(std::vector<std::string> cols) : cols_(std::move(cols)) {}
    void row(std::vector<double> r) { rows_.push_back(std::move(r)); }
    std::string csv() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < cols_.size(); ++i) os << (i ? "," : "") << cols_[i];
        os << "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << num(r[i]);
            os << "\n";
        }
        return os.str();
    }
    json records() const {
        json arr = json::array();
        for (const auto& r : rows_) {
            json o;
            for (std::size_t i = 0; i < cols_.size(); ++i) {
                if (cols_[i] == "index" || cols_[i] == "trial")
                    o[cols_[i]] = static_cast<long long>(r[i]);
                else
                    o[cols_[i]] = r[i];
            }
            arr.push_back(o);
        }
        return arr;
    }

private:
    std::vector<std::string> cols_;
    std::vector<std::vector<double>> rows_;
};

struct Output {
    json summary;
    std::optional<Table> table;
    bool scalar = false;
    std::string render(const std::string& format) const {
        if (format == "csv" && table) return table->csv();
        json o = summary;
        if (table && !scalar) o["rows"] = table->records();
        return o.dump(2) + "\n";
    }
};

void emit(const Config& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw Error("cannot open output file " + c.out);
    f << text;
}

// eval ------------------------------------------------------------------

Output run_eval(const Config& c, const std::string& fn, std::optional<double> s, int k) {
    auto p = params(c);
    auto value = [&](double x) {
        if (fn == "x1") return iterlog::x1(x, p);
        if (fn == "xk") return iterlog::xk(x, k, p);
        if (fn == "pi") return iterlog::sigma_pi(x, k, p).pi;
        if (fn == "sigma") return iterlog::sigma_pi(x, k, p).sigma;
        if (fn == "winf") return iterlog::w_infinity(x, p);
        if (fn == "nbar") return iterlog::nbar(x, p);
        throw DomainError("unknown function '" + fn + "'");
    };
    Output out;
    if (s) {
        double v = value(*s);
        out.summary = {{"fn", fn}, {"s", *s}, {"k", k}, {"a", p.a}, {"value", v}};
        Table t({"s", "value"});
        t.row({*s, v});
        out.table = t;
        out.scalar = true;
        return out;
    }
    auto g = grid(c);
    Table t({"s", "x1", "xk", "pi", "sigma", "w_inf", "nbar"});
    for (double x : g) {
        if (x >= p.domain_end()) break;
        auto tv = iterlog::sigma_pi(x, k, p);
        t.row({x, iterlog::x1(x, p), tv.x, tv.pi, tv.sigma, iterlog::w_infinity(x, p), iterlog::nbar(x, p)});
    }
    out.summary = {{"a", p.a}, {"k", k}, {"trunc_tol", p.trunc_tol}};
    out.table = t;
    return out;
}

// potentials ------------------------------------------------------------

Output run_potentials(const Config& c, bool find_T) {
    Output out;
    if (find_T) {
        double T = potential::find_T();
        out.summary = {{"T", T}, {"closed_form", potential::threshold_closed_form()}};
        Table t({"T", "closed_form"});
        t.row({T, potential::threshold_closed_form()});
        out.table = t;
        out.scalar = true;
        return out;
    }
    auto p = params(c);
    auto W = make_potential(c.potential, p);
    auto mp = W.multipliers();
    if (!mp) throw SupportError("potential '" + c.potential + "' carries no multiplier pair");
    auto g = grid(c);
    auto rep = potential::admissible(*mp, W, g, c.tol);
    Table t({"s", "W", "channel_plus", "channel_minus", "margin_plus", "margin_minus"});
    double wmin = INFINITY;
    for (std::size_t i = 0; i < rep.s.size(); ++i) {
        t.row({rep.s[i], rep.W[i], rep.channel_plus[i], rep.channel_minus[i], rep.margin_plus[i], rep.margin_minus[i]});
        wmin = std::min(wmin, rep.W[i]);
    }
    out.summary = {{"potential", W.name()}, {"min_margin", rep.min_margin}, {"tol", rep.tol}, {"min_W", wmin}};
    if (auto r = W.radii()) {
        out.summary["radius_plus"] = r->plus;
        out.summary["radius_minus"] = r->minus;
        out.summary["C_R"] = mp->surface_constant();
    }
    out.table = t;
    if (!rep.passed) throw Violation{"admissibility margin below tolerance", out.summary};
    return out;
}

// ode -------------------------------------------------------------------

Output run_ode(const Config& c, double delta, double C, double tol, const std::string& channel) {
    auto p = params(c);
    singular_ode::SolveOptions opt;
    opt.channel = channel == "minus" ? Sign::Minus : Sign::Plus;
    auto sol = singular_ode::solve(delta, C, tol, p, opt);
    auto res = singular_ode::residual(sol);
    Table t({"s", "w", "n", "m", "residual"});
    for (std::size_t i = 0; i < res.size(); ++i) {
        double s = res.r[i];
        t.row({s, sol.w_at(s), sol.n_at(s), sol.m_at(s), res.v[i]});
    }
    Output out;
    out.summary = {{"delta", sol.delta},       {"C", sol.C},
                   {"tol", sol.tol},           {"channel", channel},
                   {"iterations", sol.iterations}, {"shrinks", sol.shrinks},
                   {"residual_sup", sol.residual_sup}, {"weighted_sup", sol.weighted_sup},
                   {"fixed_point_defect", sol.fixed_point_defect}};
    out.table = t;
    if (sol.residual_sup > 10.0 * tol) throw Violation{"ode residual above 10 tol", out.summary};
    if (sol.weighted_sup > C) throw Violation{"solution leaves the weighted class", out.summary};
    return out;
}

// transform -------------------------------------------------------------

Output run_transform(const Config& c, double lo, double hi, std::size_t nodes) {
    auto p = params(c);
    auto W = make_potential(c.potential, p);
    auto g = grid(c);
    transform::VariableMap map(W, g);
    Table t({"r", "y", "W", "V"});
    for (std::size_t i = 0; i < g.size(); ++i) t.row({g[i], map.y_values()[i], W(g[i]), map.V_at_r(g[i])});
    auto rep = transform::equivalence_check(W, transform::smooth_bump(lo, hi), nodes);
    Output out;
    out.summary = {{"potential", W.name()}, {"lhs23", rep.lhs23},     {"rhs23", rep.rhs23},
                   {"lhsAA2", rep.lhsAA2},  {"rhsAA2", rep.rhsAA2}, {"rel_mismatch", rep.rel_mismatch},
                   {"nodes", rep.nodes}};
    out.table = t;
    if (rep.rel_mismatch > c.tol) throw Violation{"equivalence mismatch above tolerance", out.summary};
    return out;
}

// verify ----------------------------------------------------------------

Output run_verify(const Config& c, const std::string& ineq, std::size_t corpus, double nu) {
    auto p = params(c);
    Output out;
    json rec = {{"inequality", ineq}, {"potential", nullptr}, {"channel", 0},       {"margin_min", 0.0},
                {"quotient", nullptr}, {"grid", nullptr},     {"corpus_seed", c.seed}};

    if (ineq == "rpetit") {
        auto W = make_potential(c.potential, p);
        double R = c.grid_max;
        auto g = log_grid(c.grid_min, R, c.ppd);
        g.pop_back();
        auto rep = forms::rpetit_check(W, R, g, c.tol);
        Table t({"r", "lower_margin", "upper_margin"});
        for (std::size_t i = 0; i < rep.r.size(); ++i) t.row({rep.r[i], rep.lower_margin[i], rep.upper_margin[i]});
        rec["potential"] = W.name();
        rec["margin_min"] = rep.min_margin;
        rec["grid"] = {{"min", c.grid_min}, {"max", R}, {"ppd", c.ppd}};
        out.summary = rec;
        out.table = t;
        if (!rep.passed) throw Violation{"rpetit condition violated", rec};
        return out;
    }

    auto g = grid(c);
    std::optional<PotentialSpec> W;
    std::shared_ptr<const potential::MultiplierPair> mp;
    if (ineq == "R8") {
        W = make_potential(c.potential, p);
        mp = W->multipliers();
        if (!mp) throw SupportError("potential carries no multiplier pair");
        std::vector<double> jr;
        for (const auto& j : mp->jumps_plus) jr.push_back(j.radius);
        for (const auto& j : mp->jumps_minus) jr.push_back(j.radius);
        g = with_nodes(g, jr);
        rec["potential"] = W->name();
        rec["channel"] = json::array({0, -2});
    } else if (ineq != "hardy" && ineq != "R3" && ineq != "R6") {
        throw DomainError("unknown inequality '" + ineq + "'");
    }
    if (ineq == "R6" && !(nu > 0.0 && nu < 1.0)) throw DomainError("nu must lie in (0, 1)");

    std::size_t n = ineq == "R8" ? 2 * corpus : corpus;
    auto bumps = forms::bump_corpus(g, n, c.seed);
    std::vector<double> margin(corpus), quot(corpus);
    parallel_for(corpus, [&](std::size_t i) {
        if (ineq == "hardy" || ineq == "R3") {
            auto r = ineq == "hardy" ? forms::verify_hardy(bumps[i]) : forms::verify_R3(bumps[i]);
            double c0 = ineq == "hardy" ? 0.25 : 1.0;
            quot[i] = *r.quotient;
            margin[i] = *r.quotient - c0;
        } else if (ineq == "R6") {
            auto r = forms::verify_R6(nu, bumps[i]);
            quot[i] = *r.quotient;
            margin[i] = *r.quotient;
        } else {
            auto r = forms::verify_R8(*W, bumps[2 * i], bumps[2 * i + 1], *mp);
            margin[i] = r.pp1_margin / r.scale;
            quot[i] = r.r8_margin / r.scale;
        }
    });
    Table t({"index", "margin", ineq == "R8" ? "r8_margin" : "quotient"});
    for (std::size_t i = 0; i < corpus; ++i) t.row({double(i), margin[i], quot[i]});
    double mmin = corpus ? *std::min_element(margin.begin(), margin.end()) : 0.0;
    rec["margin_min"] = mmin;
    if (ineq == "R8") {
        rec["quotient"] = corpus ? *std::min_element(quot.begin(), quot.end()) : 0.0;
        rec["C_R"] = mp->surface_constant();
    } else {
        rec["quotient"] = corpus ? *std::min_element(quot.begin(), quot.end()) : 0.0;
    }
    if (ineq == "hardy" || ineq == "R3") {
        auto a = ineq == "hardy" ? forms::Weight([](double r) { return r; }) : forms::Weight([](double r) { return r * r; });
        rec["discrete_min"] = tridiag::smallest_eigenvalue_bisection(forms::pencil(g, a, a));
    }
    if (ineq == "R6") rec["nu"] = nu;
    rec["grid"] = {{"min", c.grid_min}, {"max", c.grid_max}, {"ppd", c.ppd}, {"nodes", g.size()}};
    rec["corpus"] = corpus;
    out.summary = rec;
    out.table = t;
    if (mmin < -c.tol) throw Violation{"margin below tolerance", rec};
    return out;
}

// counterexample --------------------------------------------------------

Output run_counterexample(const Config& c, double height, int trials) {
    auto p = params(c);
    auto fam = counterexample::standard_family(height);
    auto ode = std::make_shared<const singular_ode::OdeSolution>(singular_ode::solve(1e-2, 0.5, 1e-10, p));
    // one trial per worker, same integrator and tolerances in every case
    std::vector<counterexample::Trial> rows(trials);
    double region_end = fam.region_end();
    parallel_for(std::size_t(trials), [&](std::size_t i) {
        auto rep = counterexample::no_continuous_multiplier(fam, int(i) + 1, p, Sign::Plus, ode);
        rows[i] = rep.trials.back();
        rows[i].trial = int(i);
    });
    Table t({"trial", "s_start", "blowup_radius", "max_m"});
    bool all = trials > 0;
    json tr = json::array();
    for (const auto& r : rows) {
        t.row({double(r.trial), r.s_start, r.blowup_radius ? *r.blowup_radius : NAN, r.max_m});
        all = all && r.blew_up_in_region;
    }
    Output out;
    out.summary = {{"height", height}, {"trials", trials}, {"region_end", region_end}, {"all_blow_up", all}};
    out.table = t;
    if (height > 0.0 && !all) throw Violation{"a trajectory survived the bump region", out.summary};
    if (height == 0.0) {
        bool none = std::none_of(rows.begin(), rows.end(), [](const auto& r) { return r.blew_up_in_region; });
        if (!none) throw Violation{"control trajectory blew up", out.summary};
    }
    return out;
}

// demo-scaling ----------------------------------------------------------

Output run_scaling(const Config& c, double lo, double hi) {
    auto p = params(c);
    auto W = make_potential(c.potential, p);
    auto g = log_grid(c.grid_min, c.grid_max, c.ppd);
    auto v = sample(g, [&](double r) { return r > lo && r < hi ? std::pow((r - lo) * (hi - r), 3) : 0.0; }, true);
    std::vector<double> lams{1, 2, 4, 8, 16, 32, 64};
    if (c.grid_max < 64.0 * hi) throw GridError("grid max must exceed 64 times the bump support");
    auto rows = forms::scaling_demo(W, v, lams);
    Table t({"lambda", "kinetic", "mass", "potential", "gradient", "grad_over_mass", "margin"});
    double worst = 0.0, mmin = INFINITY;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        t.row({r.lambda, r.kinetic, r.mass, r.potential, r.gradient, r.grad_over_mass, r.margin});
        if (i > 0) worst = std::max(worst, std::abs(rows[i - 1].grad_over_mass / r.grad_over_mass / 4.0 - 1.0));
        mmin = std::min(mmin, r.margin);
    }
    Output out;
    out.summary = {{"potential", W.name()},
                   {"ratio_deviation", worst},
                   {"margin_min", mmin},
                   {"inequality_fails", mmin < 0.0}};
    out.table = t;
    if (worst > 0.05) throw Violation{"gradient/mass ratio not scaling as lambda^-2", out.summary};
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hdl: Hardy-Dirac potential laboratory"};
    app.require_subcommand(1);
    Config c;
    auto common = [&c](CLI::App* s) {
        s->add_option("--a", c.a, "tower constant a > 1");
        s->add_option("--trunc-tol", c.trunc_tol, "tail cutoff for the tower sums");
        s->add_option("--grid-min", c.grid_min);
        s->add_option("--grid-max", c.grid_max);
        s->add_option("--ppd", c.ppd, "points per decade");
        s->add_option("--tol", c.tol);
        s->add_option("--out", c.out, "output file (stdout if omitted)");
        s->add_option("--format", c.format)->check(CLI::IsMember({"csv", "json"}));
        s->add_option("--seed", c.seed);
        s->add_option("--potential", c.potential)->check(CLI::IsMember({"one", "winf", "wbar", "w1", "w2", "w3", "2s"}));
    };

    auto* ev = app.add_subcommand("eval", "tabulate X_k, W_inf, nbar");
    common(ev);
    std::string fn = "x1";
    std::optional<double> s;
    int k = 1;
    ev->add_option("--fn", fn)->check(CLI::IsMember({"x1", "xk", "pi", "sigma", "winf", "nbar"}));
    ev->add_option("--s", s);
    ev->add_option("--k", k);

    auto* pot = app.add_subcommand("potentials", "tabulate W1/W2/W3, T and break radii");
    common(pot);
    bool find_T = false;
    pot->add_flag("--find-T", find_T);

    auto* ode = app.add_subcommand("ode", "solve the singular ODE");
    common(ode);
    double delta = 1e-2, C = 0.5, ode_tol = 1e-10;
    std::string channel = "plus";
    ode->add_option("--delta", delta);
    ode->add_option("--C", C);
    ode->add_option("--ode-tol", ode_tol);
    ode->add_option("--channel", channel)->check(CLI::IsMember({"plus", "minus"}));

    auto* tr = app.add_subcommand("transform", "y/V tables and equivalence check");
    common(tr);
    double lo = 0.0, hi = 1.0;
    std::size_t nodes = 2001;
    tr->add_option("--lo", lo);
    tr->add_option("--hi", hi);
    tr->add_option("--nodes", nodes);

    auto* ver = app.add_subcommand("verify", "inequality suite over a seeded corpus");
    common(ver);
    std::string ineq = "hardy";
    std::size_t corpus = 100;
    double nu = 0.5;
    ver->add_option("--ineq", ineq)->check(CLI::IsMember({"hardy", "R3", "R6", "R8", "rpetit"}));
    ver->add_option("--corpus", corpus);
    ver->add_option("--nu", nu);

    auto* ce = app.add_subcommand("counterexample", "bump counterexample demo");
    common(ce);
    double height = 0.5;
    int trials = 4;
    ce->add_option("--height", height);
    ce->add_option("--trials", trials);

    auto* sc = app.add_subcommand("demo-scaling", "dilation demo");
    common(sc);
    double slo = 0.5, shi = 2.0;
    sc->add_option("--lo", slo);
    sc->add_option("--hi", shi);

    std::string sub;
    auto fail = [&](const std::string& kind, const std::string& what, const json& detail) {
        json rec = {{"status", "fail"}, {"subcommand", sub}, {"kind", kind}, {"error", what}};
        if (!detail.is_null()) rec["detail"] = detail;
        std::cout << rec.dump() << "\n";
        return 1;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), nullptr);
    }
    sub = app.get_subcommands().front()->get_name();

    try {
        Output out;
        if (sub == "eval") {
            if (ev->count("--format") == 0 && s) c.format = "json";
            out = run_eval(c, fn, s, k);
        } else if (sub == "potentials") {
            if (pot->count("--format") == 0 && find_T) c.format = "json";
            if (pot->count("--tol") == 0) c.tol = 1e-9;
            out = run_potentials(c, find_T);
        } else if (sub == "ode") {
            out = run_ode(c, delta, C, ode_tol, channel);
        } else if (sub == "transform") {
            if (tr->count("--tol") == 0) c.tol = 1e-6;
            out = run_transform(c, lo, hi, nodes);
        } else if (sub == "verify") {
            if (ver->count("--format") == 0) c.format = "json";
            if (ineq == "rpetit" && ver->count("--grid-max") == 0) c.grid_max = 0.1;
            if (ineq == "rpetit" && ver->count("--potential") == 0) c.potential = "winf";
            out = run_verify(c, ineq, corpus, nu);
        } else if (sub == "counterexample") {
            out = run_counterexample(c, height, trials);
        } else {
            if (sc->count("--grid-max") == 0) c.grid_max = 1e4;
            if (sc->count("--potential") == 0) c.potential = "one";
            out = run_scaling(c, slo, shi);
        }
        emit(c, out.render(c.format));
        return 0;
    } catch (const Violation& v) {
        return fail("violation", v.what, v.detail);
    } catch (const Error& e) {
        return fail("error", e.what(), nullptr);
    } catch (const std::exception& e) {
        return fail("error", e.what(), nullptr);
    }
}
