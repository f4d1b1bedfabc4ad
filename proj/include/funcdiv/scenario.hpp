#pragma once

#include <funcdiv/verifier.hpp>

#include <json.hpp>

#include <atomic>
#include <fstream>
#include <mutex>
#include <optional>
#include <thread>

namespace funcdiv {

using json = nlohmann::json;

inline constexpr int kReportSchema = 1;

/// Command-line overrides applied on top of the config file.
struct ScenarioOverrides {
    std::optional<double> quad_tol;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
};

struct ScenarioTask {
    std::string check_id;
    std::string subject;
    std::function<CheckReport()> run;
};

struct Scenario {
    int schema = kReportSchema;
    quad::QuadOptions qopt;
    int gh_order = 48;
    SDualOptions dopt;
    std::uint64_t seed = 12345u;
    std::string out;  ///< report path; empty writes the report to stdout
    std::vector<ScenarioTask> tasks;
};

// ---------------------------------------------------------------------------
// deterministic auxiliary inputs for checks that need more than one subject

/// Three symmetric, determinant-one maps; rotation angles are drawn from the
/// seed so reruns are reproducible.
inline std::vector<Mat> invariance_maps(int dim, std::uint64_t seed) {
    auto rng = make_rng(seed + 101);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI);
    auto rot2 = [](double t) {
        Mat R(2, 2);
        R << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
        return R;
    };
    std::vector<Mat> maps;
    if (dim == 1) {
        maps.push_back(-Mat::Identity(1, 1));
        return maps;
    }
    if (dim == 2) {
        Mat D1(2, 2), D2(2, 2), D3(2, 2);
        D1 << 2.0, 0.0, 0.0, 0.5;
        D2 << 3.0, 0.0, 0.0, 1.0 / 3.0;
        D3 << 1.5, 0.0, 0.0, 2.0 / 3.0;
        const Mat R1 = rot2(ang(rng)), R2 = rot2(ang(rng));
        maps.push_back(D1);
        maps.push_back(Mat(R1 * D2 * R1.transpose()));
        maps.push_back(Mat(R2 * D3 * R2.transpose()));
        return maps;
    }
    if (dim == 3) {
        Vec d1 = vec3(2.0, 1.0, 0.5), d2 = vec3(1.5, 1.0, 2.0 / 3.0),
            d3 = vec3(1.25, 0.8, 1.0);
        const double t = ang(rng);
        Mat R = Mat::Identity(3, 3);
        R(0, 0) = std::cos(t);
        R(0, 1) = -std::sin(t);
        R(1, 0) = std::sin(t);
        R(1, 1) = std::cos(t);
        maps.push_back(Mat(d1.asDiagonal()));
        maps.push_back(Mat(R * d2.asDiagonal() * R.transpose()));
        maps.push_back(Mat(d3.asDiagonal()));
        return maps;
    }
    throw ConfigError("invariance maps cover dimensions 1-3");
}

/// Nested partner for the valuation identity: multiplying by a centered
/// gaussian keeps the function log-concave and pointwise below the original.
inline LogConcaveFn valuation_partner(const LogConcaveFn& f) {
    const int n = f.dim();
    if (f.is_gaussian) {
        LogConcaveFn g = make_gaussian(Mat(f.gauss_A + 0.5 * Mat::Identity(n, n)),
                                       f.normalization);
        g.name = f.name + "+halfsq";
        return g;
    }
    LogConcaveFn out = f;
    const ScalarField p = f.potential;
    out.potential = make_field(
        n, [p](const Vec& x) { return p(x) + 0.5 * x.squaredNorm(); },
        [p](const Vec& x) { return Vec(p.grad(x) + x); },
        [p, n](const Vec& x) { return Mat(p.hess(x) + Mat::Identity(n, n)); });
    out.is_gaussian = false;
    out.name = f.name + "+halfsq";
    return out;
}

struct EtaSpec {
    ScalarField eta;
    int dim = 1;
    std::string label;
};

/// The perturbation family for the second-order checks: the quadratic
/// equality witness plus ten seeded even smooth perturbations (seven even
/// polynomials, three cosine bumps), all with analytic derivatives.
inline std::vector<EtaSpec> linearization_family(std::uint64_t seed) {
    std::vector<EtaSpec> fam;

    Mat B(2, 2);
    B << 1.0, 0.0, 0.0, 2.0;
    fam.push_back({make_field(
                       2, [B](const Vec& x) { return x.dot(B * x); },
                       [B](const Vec& x) { return Vec(2.0 * B * x); },
                       [B](const Vec&) { return Mat(2.0 * B); }),
                   2, "quadratic(1,2)"});

    auto rng = make_rng(seed);
    std::uniform_real_distribution<double> coef(-0.4, 0.4);
    for (int k = 0; k < 7; ++k) {
        const double c2 = coef(rng), c4 = coef(rng), c6 = coef(rng);
        fam.push_back(
            {make_field(
                 1,
                 [=](const Vec& x) {
                     const double t = x(0) * x(0);
                     return c2 * t + c4 * t * t + c6 * t * t * t;
                 },
                 [=](const Vec& x) {
                     const double t = x(0) * x(0);
                     return Vec(vec1(x(0) * (2.0 * c2 + 4.0 * c4 * t + 6.0 * c6 * t * t)));
                 },
                 [=](const Vec& x) {
                     const double t = x(0) * x(0);
                     Mat h(1, 1);
                     h(0, 0) = 2.0 * c2 + 12.0 * c4 * t + 30.0 * c6 * t * t;
                     return h;
                 }),
             1, "even-poly#" + std::to_string(k)});
    }
    std::uniform_real_distribution<double> amp(0.2, 0.4), freq(0.8, 1.2), width(0.1, 0.2);
    for (int k = 0; k < 3; ++k) {
        const double a = amp(rng), w = freq(rng), b = width(rng);
        fam.push_back(
            {make_field(
                 1,
                 [=](const Vec& x) {
                     return a * std::cos(w * x(0)) * std::exp(-b * x(0) * x(0));
                 },
                 [=](const Vec& x) {
                     const double e = std::exp(-b * x(0) * x(0));
                     return Vec(vec1(a * e *
                                     (-w * std::sin(w * x(0)) -
                                      2.0 * b * x(0) * std::cos(w * x(0)))));
                 },
                 [=](const Vec& x) {
                     const double t = x(0), e = std::exp(-b * t * t);
                     Mat h(1, 1);
                     h(0, 0) = a * e *
                               ((4.0 * b * b * t * t - 2.0 * b - w * w) * std::cos(w * t) +
                                4.0 * b * w * t * std::sin(w * t));
                     return h;
                 }),
             1, "cos-bump#" + std::to_string(k)});
    }
    return fam;
}

/// One report per variant, aggregated over the whole perturbation family by
/// worst margin.
inline CheckReport check_linearization_family(LinearizationVariant variant,
                                              std::uint64_t seed, int order_hi = 48) {
    const auto fam = linearization_family(seed);
    CheckReport worst;
    bool all_pass = true;
    for (const auto& m : fam) {
        CheckReport r = check_linearization(m.eta, m.dim, variant, m.label, 32, order_hi);
        all_pass = all_pass && r.pass;
        if (worst.check_id.empty() || r.margin < worst.margin) {
            worst = r;
            worst.diagnostics += " [worst of " + std::to_string(fam.size()) +
                                 ": " + m.label + "]";
        }
    }
    worst.subject = std::string(to_string(variant)) + " | even-family(" +
                    std::to_string(fam.size()) + ")";
    worst.pass = all_pass && worst.pass;
    return worst;
}

// ---------------------------------------------------------------------------
// config parsing

namespace detail {

inline void require_keys(const json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
    }
}

inline Mat parse_matrix(const json& v, int dim, const std::string& where) {
    if (v.is_number()) return Mat(v.get<double>() * Mat::Identity(dim, dim));
    if (!v.is_array() || v.empty())
        throw ConfigError(where + ": matrix must be a number or an array of rows");
    const int n = static_cast<int>(v.size());
    Mat A(n, n);
    for (int i = 0; i < n; ++i) {
        if (!v[i].is_array() || static_cast<int>(v[i].size()) != n)
            throw ConfigError(where + ": matrix rows must be square");
        for (int j = 0; j < n; ++j) A(i, j) = v[i][j].get<double>();
    }
    return A;
}

struct FnEntry {
    std::string name;
    bool is_s = false;
    LogConcaveFn lc;
    SConcaveFn sc;
    bool is_gaussian = false;
    Mat A;
    double C = 1.0;
    int dim = 1;
};

struct BodyEntry {
    std::string name;
    ConvexBody body;
    bool ellipse2 = false;
    double ax_a = 0.0, ax_b = 0.0;
};

inline FnEntry parse_function(const json& e) {
    require_keys(e, {"name", "family", "dim", "A", "C", "a", "s", "terms"}, "function entry");
    const std::string family = e.at("family").get<std::string>();
    FnEntry out;
    if (family == "gaussian") {
        const int dim = e.value("dim", e.contains("A") && e.at("A").is_array()
                                           ? static_cast<int>(e.at("A").size())
                                           : 1);
        const Mat A = parse_matrix(e.at("A"), dim, "gaussian");
        if (A.rows() != dim)
            throw ConfigError("gaussian: dim does not match the matrix size");
        out.lc = make_gaussian(A, e.value("C", 1.0));
        out.is_gaussian = true;
        out.A = A;
        out.C = e.value("C", 1.0);
        out.dim = dim;
    } else if (family == "cosh_potential") {
        out.lc = make_cosh_potential(e.value("dim", 1));
        out.dim = e.value("dim", 1);
    } else if (family == "quartic_potential") {
        out.lc = make_quartic_potential(e.value("a", 1.0), e.value("dim", 1));
        out.dim = e.value("dim", 1);
    } else if (family == "s_ball") {
        out.sc = make_s_ball(e.at("s").get<double>(), e.value("dim", 1));
        out.is_s = true;
        out.dim = e.value("dim", 1);
    } else if (family == "custom-potential-polynomial") {
        std::vector<Monomial> terms;
        for (const auto& t : e.at("terms")) {
            require_keys(t, {"coef", "powers"}, "polynomial term");
            Monomial m;
            m.coef = t.at("coef").get<double>();
            for (const auto& p : t.at("powers")) m.powers.push_back(p.get<int>());
            terms.push_back(std::move(m));
        }
        out.lc = make_polynomial_potential(e.value("dim", 1), std::move(terms));
        out.dim = e.value("dim", 1);
        validate_log_concave(out.lc);
    } else {
        throw ConfigError("unknown function family \"" + family + "\"");
    }
    out.name = e.value("name", out.is_s ? out.sc.name : out.lc.name);
    if (out.is_s)
        out.sc.name = out.name;
    else
        out.lc.name = out.name;
    return out;
}

inline BodyEntry parse_body(const json& e) {
    require_keys(e, {"name", "family", "r", "axes", "p", "eps", "k", "dim"}, "body entry");
    const std::string family = e.at("family").get<std::string>();
    BodyEntry out;
    if (family == "ball") {
        out.body = make_ball_body(e.value("r", 1.0), e.value("dim", 2));
    } else if (family == "ellipsoid") {
        const auto& ax = e.at("axes");
        if (!ax.is_array() || (ax.size() != 2 && ax.size() != 3))
            throw ConfigError("ellipsoid: axes must list 2 or 3 semi-axes");
        Vec axes(static_cast<int>(ax.size()));
        for (int i = 0; i < axes.size(); ++i) axes(i) = ax[i].get<double>();
        out.body = make_ellipsoid_body(axes);
        if (axes.size() == 2) {
            out.ellipse2 = true;
            out.ax_a = axes(0);
            out.ax_b = axes(1);
        }
    } else if (family == "lp_smooth") {
        out.body = make_lp_body(e.at("p").get<double>(), e.value("dim", 2));
    } else if (family == "perturbed_ball") {
        out.body = make_perturbed_ball_body(e.at("eps").get<double>(), e.at("k").get<int>());
    } else {
        throw ConfigError("unknown body family \"" + family + "\"");
    }
    out.name = e.value("name", out.body.name);
    out.body.name = out.name;
    return out;
}

inline Generator parse_generator(const json& e) {
    require_keys(e, {"name", "family", "lambda"}, "generator entry");
    const std::string family = e.at("family").get<std::string>();
    Generator g;
    if (family == "power") {
        g = make_power(e.at("lambda").get<double>());
    } else if (family == "tlogt") {
        g = make_tlogt();
    } else if (family == "neglog") {
        g = make_neglog();
    } else {
        throw ConfigError("unknown generator family \"" + family + "\"");
    }
    if (family != "power" && e.contains("lambda"))
        throw ConfigError("generator family \"" + family + "\" takes no lambda");
    if (e.contains("name")) g.name = e.at("name").get<std::string>();
    return g;
}

enum class FnKind { LogConcave, SConcave, Either };

inline std::vector<const FnEntry*> select_functions(const json* entry,
                                                    const std::vector<FnEntry>& fns,
                                                    FnKind kind, bool gaussian_only,
                                                    const std::string& id) {
    std::vector<const FnEntry*> out;
    auto compatible = [&](const FnEntry& f) {
        if (gaussian_only && !f.is_gaussian) return false;
        if (kind == FnKind::LogConcave) return !f.is_s;
        if (kind == FnKind::SConcave) return f.is_s;
        return true;
    };
    if (entry && entry->contains("functions")) {
        for (const auto& n : entry->at("functions")) {
            const std::string name = n.get<std::string>();
            const FnEntry* hit = nullptr;
            for (const auto& f : fns)
                if (f.name == name) hit = &f;
            if (!hit) throw ConfigError(id + ": unknown function \"" + name + "\"");
            if (!compatible(*hit))
                throw ConfigError(id + ": function \"" + name + "\" is not compatible");
            out.push_back(hit);
        }
    } else {
        for (const auto& f : fns)
            if (compatible(f)) out.push_back(&f);
    }
    if (out.empty()) throw ConfigError(id + ": no compatible function subjects");
    return out;
}

inline std::vector<const BodyEntry*> select_bodies(const json* entry,
                                                   const std::vector<BodyEntry>& bodies,
                                                   bool ellipse_only,
                                                   const std::string& id) {
    std::vector<const BodyEntry*> out;
    if (entry && entry->contains("bodies")) {
        for (const auto& n : entry->at("bodies")) {
            const std::string name = n.get<std::string>();
            const BodyEntry* hit = nullptr;
            for (const auto& b : bodies)
                if (b.name == name) hit = &b;
            if (!hit) throw ConfigError(id + ": unknown body \"" + name + "\"");
            if (ellipse_only && !hit->ellipse2)
                throw ConfigError(id + ": body \"" + name + "\" is not a planar ellipse");
            out.push_back(hit);
        }
    } else {
        for (const auto& b : bodies)
            if (!ellipse_only || b.ellipse2) out.push_back(&b);
    }
    if (out.empty()) throw ConfigError(id + ": no compatible body subjects");
    return out;
}

inline std::vector<Generator> select_generators(const json* entry,
                                                const std::vector<Generator>& gens,
                                                const std::string& id) {
    std::vector<Generator> out;
    if (entry && entry->contains("generators")) {
        for (const auto& n : entry->at("generators")) {
            const std::string name = n.get<std::string>();
            const Generator* hit = nullptr;
            for (const auto& g : gens)
                if (g.name == name) hit = &g;
            if (!hit) throw ConfigError(id + ": unknown generator \"" + name + "\"");
            out.push_back(*hit);
        }
    } else {
        out = gens;
    }
    if (out.empty()) throw ConfigError(id + ": no generators configured");
    return out;
}

inline void expand_compute(const json& e, const std::vector<FnEntry>& fns,
                           const std::vector<BodyEntry>& bodies,
                           const std::vector<Generator>& gens, const Scenario& sc,
                           std::vector<ScenarioTask>& tasks) {
    require_keys(e, {"compute", "function", "body", "generator", "lambda"},
                 "compute entry");
    const std::string kind = e.at("compute").get<std::string>();
    const std::string id = "compute_" + kind;
    auto value_task = [&](const std::string& subject,
                          std::function<DivResult()> eval) {
        tasks.push_back({id, subject, [id, subject, eval]() {
                             const DivResult r = eval();
                             CheckReport rep;
                             rep.check_id = id;
                             rep.subject = subject;
                             rep.lhs = rep.rhs = r.value;
                             rep.margin = 0.0;
                             rep.tolerance = r.error;
                             rep.pass = r.converged && !r.infinite && finite(r.value);
                             rep.diagnostics = "value; quad_err=" + fmt(r.error) +
                                               " evals=" + std::to_string(r.evaluations) +
                                               (r.note.empty() ? "" : " [" + r.note + "]");
                             return rep;
                         }});
    };
    auto find_fn = [&]() -> const FnEntry& {
        const std::string name = e.at("function").get<std::string>();
        for (const auto& f : fns)
            if (f.name == name) return f;
        throw ConfigError(id + ": unknown function \"" + name + "\"");
    };
    const auto qopt = sc.qopt;
    if (kind == "mass") {
        const FnEntry& f = find_fn();
        if (f.is_s) {
            auto fn = f.sc;
            value_task(f.name, [fn, qopt]() { return integral_of(fn, qopt); });
        } else {
            auto fn = f.lc;
            value_task(f.name, [fn, qopt]() { return integral_of(fn, qopt); });
        }
    } else if (kind == "divergence") {
        const FnEntry& f = find_fn();
        const std::string gname = e.at("generator").get<std::string>();
        const Generator* hit = nullptr;
        for (const auto& g : gens)
            if (g.name == gname) hit = &g;
        if (!hit) throw ConfigError(id + ": unknown generator \"" + gname + "\"");
        const Generator g = *hit;
        if (f.is_s) {
            auto fn = f.sc;
            value_task(f.name + " | " + g.name,
                       [g, fn, qopt]() { return df_s_concave(g, fn, qopt); });
        } else {
            auto fn = f.lc;
            value_task(f.name + " | " + g.name,
                       [g, fn, qopt]() { return df_log_concave(g, fn, qopt); });
        }
    } else if (kind == "surface_area") {
        const FnEntry& f = find_fn();
        if (f.is_s) throw ConfigError(id + ": surface areas cover log-concave subjects");
        const double lambda = e.at("lambda").get<double>();
        auto fn = f.lc;
        value_task(f.name + " | lambda=" + fmt(lambda),
                   [lambda, fn, qopt]() { return affine_surface_area(fn, lambda, qopt); });
    } else if (kind == "omega") {
        const FnEntry& f = find_fn();
        if (f.is_s) throw ConfigError(id + ": omega covers log-concave subjects");
        auto fn = f.lc;
        value_task(f.name, [fn, qopt]() {
            DivResult r;
            r.value = omega(fn, qopt);
            r.converged = finite(r.value);
            return r;
        });
    } else if (kind == "volume") {
        const std::string name = e.at("body").get<std::string>();
        const BodyEntry* hit = nullptr;
        for (const auto& b : bodies)
            if (b.name == name) hit = &b;
        if (!hit) throw ConfigError(id + ": unknown body \"" + name + "\"");
        auto K = hit->body;
        value_task(hit->name, [K, qopt]() {
            DivResult r = df_body(make_power(0.0), K, qopt);
            r.value /= K.n;
            return r;
        });
    } else {
        throw ConfigError("unknown compute kind \"" + kind + "\"");
    }
}

inline void expand_check(const std::string& id, const json* entry,
                         const std::vector<FnEntry>& fns,
                         const std::vector<BodyEntry>& bodies,
                         const std::vector<Generator>& gens, const Scenario& sc,
                         std::vector<ScenarioTask>& tasks) {
    bool known = false;
    for (const auto& info : check_registry())
        if (info.id == id) known = true;
    if (!known) throw ConfigError("unknown check id \"" + id + "\"");

    const auto qopt = sc.qopt;
    const auto dopt = sc.dopt;
    auto push = [&](const std::string& subject, std::function<CheckReport()> run) {
        tasks.push_back({id, subject, std::move(run)});
    };

    if (id == "check_gaussian_closed_form") {
        const auto sel = select_functions(entry, fns, FnKind::LogConcave, true, id);
        const auto gg = select_generators(entry, gens, id);
        for (const auto* f : sel) {
            const Mat A = f->A;
            const double C = f->C;
            push(f->name,
                 [A, C, gg, qopt]() { return check_gaussian_closed_form(A, C, gg, qopt); });
        }
    } else if (id == "check_mass_identity") {
        for (const auto* f : select_functions(entry, fns, FnKind::LogConcave, false, id)) {
            auto fn = f->lc;
            push(f->name, [fn, qopt]() { return check_mass_identity(fn, qopt); });
        }
    } else if (id == "check_s_mass_identity") {
        for (const auto* f : select_functions(entry, fns, FnKind::SConcave, false, id)) {
            auto fn = f->sc;
            push(f->name, [fn, qopt]() { return check_s_mass_identity(fn, qopt); });
        }
    } else if (id == "check_duality") {
        const auto sel = select_functions(entry, fns, FnKind::Either, false, id);
        const auto gg = select_generators(entry, gens, id);
        for (const auto* f : sel)
            for (const auto& g : gg) {
                if (f->is_s) {
                    auto fn = f->sc;
                    push(f->name + " | " + g.name,
                         [g, fn, qopt, dopt]() { return check_duality(g, fn, qopt, dopt); });
                } else {
                    auto fn = f->lc;
                    push(f->name + " | " + g.name,
                         [g, fn, qopt]() { return check_duality(g, fn, qopt); });
                }
            }
    } else if (id == "check_as_duality") {
        std::vector<double> lambdas = {0.3, 0.7};
        if (entry && entry->contains("lambdas")) {
            lambdas.clear();
            for (const auto& l : entry->at("lambdas")) lambdas.push_back(l.get<double>());
            if (lambdas.empty()) throw ConfigError(id + ": lambdas must be non-empty");
        }
        for (const auto* f : select_functions(entry, fns, FnKind::LogConcave, false, id))
            for (double lambda : lambdas) {
                auto fn = f->lc;
                push(f->name + " | lambda=" + fmt(lambda),
                     [lambda, fn, qopt]() { return check_as_duality(lambda, fn, qopt); });
            }
    } else if (id == "check_s_identity") {
        for (const auto* f : select_functions(entry, fns, FnKind::SConcave, false, id)) {
            auto fn = f->sc;
            push(f->name, [fn, qopt, dopt]() { return check_s_identity(fn, qopt, dopt); });
        }
    } else if (id == "check_jensen_bound") {
        const auto sel = select_functions(entry, fns, FnKind::Either, false, id);
        const auto gg = select_generators(entry, gens, id);
        for (const auto* f : sel)
            for (const auto& g : gg) {
                if (f->is_s) {
                    auto fn = f->sc;
                    push(f->name + " | " + g.name,
                         [g, fn, qopt]() { return check_jensen_bound(g, fn, qopt); });
                } else {
                    auto fn = f->lc;
                    push(f->name + " | " + g.name,
                         [g, fn, qopt]() { return check_jensen_bound(g, fn, qopt); });
                }
            }
    } else if (id == "check_kl_bound" || id == "check_kl_bound_centered") {
        const bool centered = id == "check_kl_bound_centered";
        for (const auto* f : select_functions(entry, fns, FnKind::LogConcave, false, id)) {
            auto fn = f->lc;
            push(f->name,
                 [fn, centered, qopt]() { return check_kl_bound(fn, centered, qopt); });
        }
    } else if (id == "check_invariance") {
        const auto sel = select_functions(entry, fns, FnKind::LogConcave, false, id);
        const auto gg = select_generators(entry, gens, id);
        const std::uint64_t seed = sc.seed;
        for (const auto* f : sel)
            for (const auto& g : gg) {
                auto fn = f->lc;
                const auto maps = invariance_maps(f->dim, seed);
                push(f->name + " | " + g.name,
                     [g, fn, maps, qopt]() { return check_invariance(g, fn, maps, qopt); });
            }
    } else if (id == "check_valuation") {
        const auto sel = select_functions(entry, fns, FnKind::LogConcave, false, id);
        const auto gg = select_generators(entry, gens, id);
        for (const auto* f : sel)
            for (const auto& g : gg) {
                auto a = f->lc;
                auto b = valuation_partner(f->lc);
                push(f->name + " | " + g.name,
                     [g, a, b, qopt]() { return check_valuation(g, a, b, qopt); });
            }
    } else if (id == "check_monotonicity_interp" || id == "check_monotonicity_mass" ||
               id == "check_monotonicity_sup") {
        const int clause = id == "check_monotonicity_interp" ? 1
                           : id == "check_monotonicity_mass" ? 2
                                                             : 3;
        for (const auto* f : select_functions(entry, fns, FnKind::LogConcave, false, id)) {
            auto fn = f->lc;
            push(f->name, [clause, fn, qopt]() { return check_monotonicity(clause, fn, qopt); });
        }
    } else if (id == "check_ladder_monotone") {
        for (const auto* f : select_functions(entry, fns, FnKind::LogConcave, false, id)) {
            auto fn = f->lc;
            push(f->name, [fn, qopt]() { return check_ladder_monotone(fn, qopt); });
        }
    } else if (id == "check_omega_ladder") {
        for (const auto* f : select_functions(entry, fns, FnKind::LogConcave, false, id)) {
            auto fn = f->lc;
            push(f->name, [fn, qopt]() { return check_omega_ladder(fn, qopt); });
        }
    } else if (id == "check_omega_product") {
        for (const auto* f : select_functions(entry, fns, FnKind::LogConcave, false, id)) {
            auto fn = f->lc;
            push(f->name, [fn, qopt]() { return check_omega_product(fn, qopt); });
        }
    } else if (id == "check_s_limit") {
        const auto sel = select_functions(entry, fns, FnKind::LogConcave, false, id);
        const auto gg = select_generators(entry, gens, id);
        for (const auto* f : sel)
            for (const auto& g : gg) {
                auto fn = f->lc;
                push(f->name + " | " + g.name,
                     [g, fn, qopt]() { return check_s_limit(g, fn, qopt); });
            }
    } else if (id == "check_body_jensen" || id == "check_body_duality" ||
               id == "check_body_bridge") {
        const auto sel = select_bodies(entry, bodies, false, id);
        const auto gg = select_generators(entry, gens, id);
        for (const auto* b : sel)
            for (const auto& g : gg) {
                auto K = b->body;
                if (id == "check_body_jensen")
                    push(b->name + " | " + g.name,
                         [g, K, qopt]() { return check_body_jensen(g, K, qopt); });
                else if (id == "check_body_duality")
                    push(b->name + " | " + g.name,
                         [g, K, qopt]() { return check_body_duality(g, K, qopt); });
                else
                    push(b->name + " | " + g.name,
                         [g, K, qopt]() { return check_body_bridge(g, K, qopt); });
            }
    } else if (id == "check_curvature_identity") {
        for (const auto* b : select_bodies(entry, bodies, true, id)) {
            const double a = b->ax_a, bb = b->ax_b;
            push(b->name, [a, bb]() { return check_curvature_identity(a, bb); });
        }
    } else if (id == "check_lift_consistency") {
        const auto sel = select_functions(entry, fns, FnKind::SConcave, false, id);
        const auto gg = select_generators(entry, gens, id);
        for (const auto* f : sel) {
            if (f->sc.s != 1.0 || f->dim != 1)
                throw ConfigError(id + ": \"" + f->name +
                                  "\" must be a concavity-1 profile on the line");
            for (const auto& g : gg) {
                auto fn = f->sc;
                push(f->name + " | " + g.name,
                     [g, fn, qopt]() { return check_lift_consistency(g, fn, qopt); });
            }
        }
    } else if (id == "check_linearization") {
        const std::uint64_t seed = sc.seed;
        const int hi = sc.gh_order;
        for (auto v :
             {LinearizationVariant::HessianDominates, LinearizationVariant::VarianceLower,
              LinearizationVariant::VarianceUpper, LinearizationVariant::ReversePoincare})
            push(std::string(to_string(v)),
                 [v, seed, hi]() { return check_linearization_family(v, seed, hi); });
    } else {
        throw ConfigError("check id \"" + id + "\" is not runnable from a scenario");
    }
}

inline Scenario parse_scenario_impl(const json& cfg, const ScenarioOverrides& ov) {
    require_keys(cfg,
                 {"schema", "seed", "quad", "transforms", "generators", "functions",
                  "bodies", "checks", "out"},
                 "config");
    Scenario sc;
    sc.schema = cfg.value("schema", 1);
    if (sc.schema != 1)
        throw ConfigError("unsupported schema " + std::to_string(sc.schema));

    if (ov.seed)
        sc.seed = *ov.seed;
    else if (cfg.contains("seed"))
        sc.seed = cfg.at("seed").get<std::uint64_t>();
    else
        sc.seed = default_seed();

    if (cfg.contains("quad")) {
        const auto& q = cfg.at("quad");
        require_keys(q, {"tol", "max_depth", "gh_order"}, "quad");
        sc.qopt.tol = q.value("tol", 0.0);
        sc.qopt.max_depth = q.value("max_depth", sc.qopt.max_depth);
        sc.gh_order = q.value("gh_order", 48);
        if (sc.gh_order < 2) throw ConfigError("quad.gh_order must be at least 2");
    }
    if (ov.quad_tol) sc.qopt.tol = *ov.quad_tol;
    if (sc.qopt.tol < 0.0) throw ConfigError("quad.tol must be nonnegative");

    if (cfg.contains("transforms")) {
        const auto& t = cfg.at("transforms");
        require_keys(t, {"grid_1d", "grid_2d"}, "transforms");
        sc.dopt.grid_1d = t.value("grid_1d", sc.dopt.grid_1d);
        sc.dopt.grid_2d = t.value("grid_2d", sc.dopt.grid_2d);
        if (sc.dopt.grid_1d < 3 || sc.dopt.grid_2d < 3)
            throw ConfigError("transform grids need at least 3 points");
    }

    sc.out = ov.out ? *ov.out : cfg.value("out", std::string());

    std::vector<detail::FnEntry> fns;
    if (cfg.contains("functions"))
        for (const auto& e : cfg.at("functions")) fns.push_back(parse_function(e));
    std::vector<detail::BodyEntry> bodies;
    if (cfg.contains("bodies"))
        for (const auto& e : cfg.at("bodies")) bodies.push_back(parse_body(e));
    std::vector<Generator> gens;
    if (cfg.contains("generators"))
        for (const auto& e : cfg.at("generators")) gens.push_back(parse_generator(e));

    for (std::size_t i = 0; i < fns.size(); ++i)
        for (std::size_t j = i + 1; j < fns.size(); ++j)
            if (fns[i].name == fns[j].name)
                throw ConfigError("duplicate function name \"" + fns[i].name + "\"");
    for (std::size_t i = 0; i < bodies.size(); ++i)
        for (std::size_t j = i + 1; j < bodies.size(); ++j)
            if (bodies[i].name == bodies[j].name)
                throw ConfigError("duplicate body name \"" + bodies[i].name + "\"");
    for (std::size_t i = 0; i < gens.size(); ++i)
        for (std::size_t j = i + 1; j < gens.size(); ++j)
            if (gens[i].name == gens[j].name)
                throw ConfigError("duplicate generator name \"" + gens[i].name + "\"");

    if (!cfg.contains("checks") || !cfg.at("checks").is_array() ||
        cfg.at("checks").empty())
        throw ConfigError("config needs a non-empty \"checks\" array");

    for (const auto& c : cfg.at("checks")) {
        if (c.is_string()) {
            expand_check(c.get<std::string>(), nullptr, fns, bodies, gens, sc, sc.tasks);
        } else if (c.is_object() && c.contains("compute")) {
            expand_compute(c, fns, bodies, gens, sc, sc.tasks);
        } else if (c.is_object()) {
            require_keys(c, {"id", "functions", "bodies", "generators", "lambdas"},
                         "check entry");
            expand_check(c.at("id").get<std::string>(), &c, fns, bodies, gens, sc,
                         sc.tasks);
        } else {
            throw ConfigError("check entries must be ids or objects");
        }
    }
    return sc;
}

}  // namespace detail

inline Scenario parse_scenario(const json& cfg, const ScenarioOverrides& ov = {}) {
    try {
        return detail::parse_scenario_impl(cfg, ov);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
}

inline Scenario load_scenario(const std::string& path, const ScenarioOverrides& ov = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config \"" + path + "\"");
    json cfg;
    try {
        cfg = json::parse(in, nullptr, /*allow_exceptions=*/true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    return parse_scenario(cfg, ov);
}

// ---------------------------------------------------------------------------
// execution and reporting

/// Runs every task; tasks are independent, so any number of threads gives the
/// same report. Thrown errors become failed records rather than aborting the
/// run.
inline std::vector<CheckReport> run_scenario(
    const Scenario& sc, int jobs = 1,
    const std::function<void(std::size_t, const CheckReport&)>& progress = {}) {
    std::vector<CheckReport> out(sc.tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= sc.tasks.size()) return;
            CheckReport r;
            try {
                r = sc.tasks[i].run();
            } catch (const std::exception& e) {
                r.check_id = sc.tasks[i].check_id;
                r.subject = sc.tasks[i].subject;
                r.lhs = r.rhs = r.margin = std::numeric_limits<double>::quiet_NaN();
                r.tolerance = 0.0;
                r.pass = false;
                r.diagnostics = std::string("error: ") + e.what();
            }
            std::lock_guard<std::mutex> lock(mu);
            out[i] = std::move(r);
            if (progress) progress(i, out[i]);
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int k = 0; k < jobs; ++k) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return out;
}

inline json report_record(const CheckReport& r) {
    return json{{"schema", kReportSchema}, {"record", "check"},
                {"check_id", r.check_id},  {"subject", r.subject},
                {"lhs", r.lhs},            {"rhs", r.rhs},
                {"margin", r.margin},      {"tolerance", r.tolerance},
                {"pass", r.pass},          {"diagnostics", r.diagnostics}};
}

inline json report_summary(const std::vector<CheckReport>& reports, double elapsed_s,
                           std::uint64_t seed) {
    std::size_t passed = 0;
    for (const auto& r : reports)
        if (r.pass) ++passed;
    return json{{"schema", kReportSchema},
                {"record", "summary"},
                {"checks", reports.size()},
                {"passed", passed},
                {"failed", reports.size() - passed},
                {"pass", passed == reports.size()},
                {"seed", seed},
                {"elapsed_seconds", elapsed_s}};
}

}  // namespace funcdiv
