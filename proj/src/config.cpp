#include "shuttle/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "shuttle/errors.hpp"

namespace shuttle {

using nlohmann::json;

const char* kind_name(ProblemKind kind) {
    switch (kind) {
    case ProblemKind::additive_continuous: return "additive-continuous";
    case ProblemKind::discounted_continuous: return "discounted-continuous";
    case ProblemKind::additive_discrete: return "additive-discrete";
    case ProblemKind::discounted_discrete: return "discounted-discrete";
    }
    return "?";
}

bool is_discrete(ProblemKind kind) {
    return kind == ProblemKind::additive_discrete || kind == ProblemKind::discounted_discrete;
}

bool is_discounted(ProblemKind kind) {
    return kind == ProblemKind::discounted_continuous || kind == ProblemKind::discounted_discrete;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& msg) {
    throw ConfigError(where + ": " + msg);
}

double as_number(const json& node, const std::string& where) {
    if (!node.is_number()) {
        fail(where, "expected a number, got " + std::string(node.type_name()));
    }
    const double v = node.get<double>();
    if (!std::isfinite(v)) {
        fail(where, "not finite");
    }
    return v;
}

std::size_t as_count(const json& node, const std::string& where) {
    if (!node.is_number_integer() || node.get<long long>() < 0) {
        fail(where, "expected a non-negative integer");
    }
    return node.get<std::size_t>();
}

std::vector<double> as_numbers(const json& node, const std::string& where) {
    if (!node.is_array()) {
        fail(where, "expected an array of numbers");
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < node.size(); ++i) {
        out.push_back(as_number(node[i], where + "/" + std::to_string(i)));
    }
    return out;
}

double parse_real(const std::string& text, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        fail(where, "cannot read '" + text + "' as a number");
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) {
        ++used;
    }
    if (used != text.size() || !std::isfinite(v)) {
        fail(where, "cannot read '" + text + "' as a number");
    }
    return v;
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
        fail(where.empty() ? "/" : where, "expected an object");
    }
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            fail(where + "/" + item.key(), "unknown field");
        }
    }
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

}  // namespace

CoefficientSpec parse_coefficient(const json& node, const std::string& where) {
    CoefficientSpec spec;
    spec.where = where;
    if (node.is_number()) {
        spec.data = {as_number(node, where)};
        return spec;
    }
    if (node.is_array()) {
        spec.form = CoefficientSpec::Form::cells;
        spec.data = as_numbers(node, where);
        if (spec.data.empty()) {
            fail(where, "empty cell array");
        }
        return spec;
    }
    if (!node.is_string()) {
        fail(where, "expected a number, an array or a shorthand string");
    }
    const std::string text = node.get<std::string>();
    const auto colon = text.find(':');
    if (colon == std::string::npos) {
        fail(where, "shorthand '" + text + "' has no form prefix (const:, poly:, cells:)");
    }
    const std::string form = text.substr(0, colon);
    const std::string body = text.substr(colon + 1);
    if (form == "const") {
        spec.data = {parse_real(body, where)};
    } else if (form == "poly") {
        spec.form = CoefficientSpec::Form::poly;
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            spec.data.push_back(parse_real(item, where));
        }
        if (spec.data.empty()) {
            fail(where, "polynomial without coefficients");
        }
    } else if (form == "cells") {
        spec.form = CoefficientSpec::Form::cells;
        json arr;
        try {
            arr = json::parse(body);
        } catch (const json::parse_error&) {
            fail(where, "cells: expects a JSON array, got '" + body + "'");
        }
        spec.data = as_numbers(arr, where);
        if (spec.data.empty()) {
            fail(where, "empty cell array");
        }
    } else {
        fail(where, "unknown shorthand form '" + form + "'");
    }
    return spec;
}

namespace {

double horner(const std::vector<double>& a, double x) {
    double v = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) {
        v = v * x + *it;
    }
    return v;
}

std::vector<double> sample(const CoefficientSpec& spec, std::size_t count,
                           const std::function<double(std::size_t)>& at, const char* unit) {
    switch (spec.form) {
    case CoefficientSpec::Form::constant:
        return std::vector<double>(count, spec.data.front());
    case CoefficientSpec::Form::poly: {
        std::vector<double> out(count);
        for (std::size_t i = 0; i < count; ++i) {
            out[i] = horner(spec.data, at(i));
        }
        return out;
    }
    case CoefficientSpec::Form::cells:
        if (spec.data.size() != count) {
            fail(spec.where, "has " + std::to_string(spec.data.size()) + " values but the problem has " +
                                 std::to_string(count) + " " + unit);
        }
        return spec.data;
    }
    return {};
}

}  // namespace

std::vector<double> CoefficientSpec::on_cells(const Grid& grid) const {
    return sample(*this, grid.n_cells(), [&](std::size_t i) { return grid.midpoint(i); }, "cells");
}

std::vector<double> CoefficientSpec::on_states(std::size_t count) const {
    return sample(*this, count, [](std::size_t i) { return static_cast<double>(i); }, "states");
}

namespace {

ProblemKind parse_kind(const json& node) {
    if (!node.is_string()) {
        fail("/kind", "expected a string");
    }
    const std::string k = node.get<std::string>();
    for (ProblemKind kind : {ProblemKind::additive_continuous, ProblemKind::discounted_continuous,
                             ProblemKind::additive_discrete, ProblemKind::discounted_discrete}) {
        if (k == kind_name(kind)) {
            return kind;
        }
    }
    fail("/kind", "unknown kind '" + k + "'");
}

void parse_series(const json& node, SeriesOptions& out) {
    check_keys(node, "/series", {"tol", "max_orders"});
    if (auto* v = find(node, "tol")) {
        out.tol = as_number(*v, "/series/tol");
        if (out.tol <= 0.0) {
            fail("/series/tol", "must be positive");
        }
    }
    if (auto* v = find(node, "max_orders")) {
        out.max_orders = as_count(*v, "/series/max_orders");
    }
}

void parse_simulation(const json& node, SimConfig& out) {
    check_keys(node, "/simulation", {"h", "replicas", "seed", "max_time", "max_steps", "threads"});
    if (auto* v = find(node, "h")) out.h = as_number(*v, "/simulation/h");
    if (auto* v = find(node, "replicas")) out.replicas = as_count(*v, "/simulation/replicas");
    if (auto* v = find(node, "seed")) {
        if (!v->is_number_unsigned()) {
            fail("/simulation/seed", "expected an unsigned integer");
        }
        out.seed = v->get<std::uint64_t>();
    }
    if (auto* v = find(node, "max_time")) out.max_time = as_number(*v, "/simulation/max_time");
    if (auto* v = find(node, "max_steps")) out.max_steps = as_count(*v, "/simulation/max_steps");
    if (auto* v = find(node, "threads")) {
        out.threads = static_cast<unsigned>(as_count(*v, "/simulation/threads"));
    }
    try {
        out.validate();
    } catch (const Error& e) {
        fail("/simulation", e.what());
    }
}

void parse_verify(const json& node, VerifyOptions& out) {
    check_keys(node, "/verify", {"simulate", "martingale", "perturbations", "oracle_instances",
                                 "brute_force_points", "window", "perturbation_seed"});
    auto flag = [&](const char* key, bool& dst) {
        if (auto* v = find(node, key)) {
            if (!v->is_boolean()) {
                fail(std::string("/verify/") + key, "expected true or false");
            }
            dst = v->get<bool>();
        }
    };
    flag("simulate", out.simulate);
    flag("martingale", out.martingale);
    if (auto* v = find(node, "perturbations")) out.perturbations = as_count(*v, "/verify/perturbations");
    if (auto* v = find(node, "oracle_instances")) {
        out.oracle_instances = as_count(*v, "/verify/oracle_instances");
    }
    if (auto* v = find(node, "brute_force_points")) {
        out.brute_force_points = as_count(*v, "/verify/brute_force_points");
        if (out.brute_force_points == 0) {
            fail("/verify/brute_force_points", "must be at least 1");
        }
    }
    if (auto* v = find(node, "window")) {
        out.window = as_number(*v, "/verify/window");
        if (out.window <= 0.0) {
            fail("/verify/window", "must be positive");
        }
    }
    if (auto* v = find(node, "perturbation_seed")) {
        out.perturbation_seed = as_count(*v, "/verify/perturbation_seed");
    }
}

}  // namespace

ProblemConfig parse_config(const json& doc) {
    if (!doc.is_object()) {
        fail("/", "config must be a JSON object");
    }
    ProblemConfig cfg;
    const json* version = find(doc, "schema_version");
    if (!version) {
        fail("/schema_version", "missing");
    }
    if (!version->is_number_integer() || version->get<int>() != kSchemaVersion) {
        fail("/schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
    }
    const json* kind = find(doc, "kind");
    if (!kind) {
        fail("/kind", "missing");
    }
    cfg.kind = parse_kind(*kind);
    const bool discrete = is_discrete(cfg.kind);
    const bool discounted = is_discounted(cfg.kind);
    const char* rate_key = discounted ? (discrete ? "rho" : "alpha") : "f";

    std::set<std::string> allowed{"schema_version", "kind", "series", "simulation", "verify", "control", rate_key};
    if (discrete) {
        allowed.insert({"N", "W", "eps", "ctmc"});
        allowed.insert(discounted ? "y" : "constraint");
        if (discounted) {
            allowed.insert("alpha");  // CTMC discount rates
        }
    } else {
        allowed.insert({"grid", "sigma2", "reference"});
        allowed.insert(discounted ? "y" : "constraint");
        if (discounted) {
            allowed.insert("a_convention");
        }
    }
    check_keys(doc, "", allowed);

    if (auto* v = find(doc, "series")) parse_series(*v, cfg.series);
    if (auto* v = find(doc, "simulation")) parse_simulation(*v, cfg.sim);
    if (auto* v = find(doc, "verify")) parse_verify(*v, cfg.verify);

    if (!discrete) {
        if (auto* v = find(doc, "grid")) {
            cfg.grid_cells = as_count(*v, "/grid");
            if (cfg.grid_cells < 2) {
                fail("/grid", "needs at least 2 cells");
            }
        }
        if (auto* v = find(doc, "sigma2")) cfg.sigma2 = parse_coefficient(*v, "/sigma2");
        const json* rate = find(doc, rate_key);
        if (!rate) {
            fail(std::string("/") + rate_key, "missing");
        }
        cfg.rate = parse_coefficient(*rate, std::string("/") + rate_key);
        if (auto* ref = find(doc, "reference")) {
            check_keys(*ref, "/reference", {"drift", "scale", "scale_factor"});
            const json* d = find(*ref, "drift");
            const json* s = find(*ref, "scale");
            if (d && s) {
                fail("/reference", "give either drift or scale, not both");
            }
            if (d) cfg.drift = parse_coefficient(*d, "/reference/drift");
            if (s) cfg.scale = parse_coefficient(*s, "/reference/scale");
            if (auto* f = find(*ref, "scale_factor")) {
                cfg.scale_factor = as_number(*f, "/reference/scale_factor");
                if (cfg.scale_factor <= 0.0) {
                    fail("/reference/scale_factor", "must be positive");
                }
            }
        }
        if (discounted) {
            if (auto* v = find(doc, "y")) {
                cfg.y = as_number(*v, "/y");
                if (cfg.y < 0.0 || cfg.y > 1.0) {
                    fail("/y", "must lie in [0, 1]");
                }
            }
            if (auto* v = find(doc, "a_convention")) {
                const std::string c = v->is_string() ? v->get<std::string>() : "";
                if (c == "sqrt2") {
                    cfg.convention = AConvention::sqrt2;
                } else if (c == "no-sqrt2") {
                    cfg.convention = AConvention::no_sqrt2;
                } else {
                    fail("/a_convention", "expected \"sqrt2\" or \"no-sqrt2\"");
                }
            }
        } else if (auto* c = find(doc, "constraint")) {
            check_keys(*c, "/constraint", {"from", "to"});
            const json* from = find(*c, "from");
            const json* to = find(*c, "to");
            if (!from || !to) {
                fail("/constraint", "needs both from and to");
            }
            cfg.constraint_from = as_number(*from, "/constraint/from");
            cfg.constraint_to = as_number(*to, "/constraint/to");
            if (!(0.0 <= *cfg.constraint_from && *cfg.constraint_from <= *cfg.constraint_to &&
                  *cfg.constraint_to <= 1.0)) {
                fail("/constraint", "needs 0 <= from <= to <= 1");
            }
        }
        if (auto* ctl = find(doc, "control")) {
            check_keys(*ctl, "/control", {"scale"});
            const json* s = find(*ctl, "scale");
            if (!s) {
                fail("/control/scale", "missing");
            }
            cfg.control_scale = parse_coefficient(*s, "/control/scale");
        }
        return cfg;
    }

    // discrete
    if (auto* c = find(doc, "ctmc")) {
        check_keys(*c, "/ctmc", {"lambda", "mu"});
        const json* lam = find(*c, "lambda");
        const json* mu = find(*c, "mu");
        if (!lam || !mu) {
            fail("/ctmc", "needs lambda and mu");
        }
        CtmcRates rates{as_numbers(*lam, "/ctmc/lambda"), as_numbers(*mu, "/ctmc/mu")};
        try {
            rates.validate();
        } catch (const Error& e) {
            fail("/ctmc", e.what());
        }
        if (find(doc, "W") || find(doc, "eps")) {
            fail("/ctmc", "W and eps are determined by the rates; drop them");
        }
        cfg.N = rates.N();
        cfg.ctmc = std::move(rates);
    }
    if (auto* v = find(doc, "N")) {
        const std::size_t n = as_count(*v, "/N");
        if (cfg.ctmc && n != cfg.N) {
            fail("/N", "disagrees with the CTMC rate arrays (N = " + std::to_string(cfg.N) + ")");
        }
        cfg.N = n;
    }
    if (cfg.N < 1) {
        fail("/N", "missing or zero (needs N >= 1)");
    }
    if (auto* v = find(doc, "W")) {
        cfg.weights = as_numbers(*v, "/W");
        if (cfg.weights->size() != cfg.N) {
            fail("/W", "needs N = " + std::to_string(cfg.N) + " edge weights");
        }
    }
    if (auto* v = find(doc, "eps")) cfg.eps = parse_coefficient(*v, "/eps");

    const char* value_key = rate_key;
    if (cfg.ctmc && discounted) {
        if (find(doc, "rho")) {
            fail("/rho", "a CTMC takes discount rates under alpha");
        }
        value_key = "alpha";
    } else if (discounted && find(doc, "alpha")) {
        fail("/alpha", "discount rates apply to CTMC problems only; use rho");
    }
    const json* rate = find(doc, value_key);
    if (!rate) {
        fail(std::string("/") + value_key, "missing");
    }
    cfg.rate = parse_coefficient(*rate, std::string("/") + value_key);

    if (discounted) {
        cfg.y = 1.0;
        if (auto* v = find(doc, "y")) {
            cfg.y = static_cast<double>(as_count(*v, "/y"));
            if (cfg.y < 1.0 || cfg.y > static_cast<double>(cfg.N)) {
                fail("/y", "must be a state in 1..N");
            }
        }
    } else if (auto* c = find(doc, "constraint")) {
        check_keys(*c, "/constraint", {"edges"});
        const json* e = find(*c, "edges");
        if (!e || !e->is_array()) {
            fail("/constraint/edges", "expected an array of edge indices");
        }
        cfg.constraint_edges.clear();
        for (std::size_t i = 0; i < e->size(); ++i) {
            const std::size_t edge = as_count((*e)[i], "/constraint/edges/" + std::to_string(i));
            if (edge >= cfg.N) {
                fail("/constraint/edges/" + std::to_string(i), "edge index must be below N");
            }
            cfg.constraint_edges.push_back(edge);
        }
        if (std::find(cfg.constraint_edges.begin(), cfg.constraint_edges.end(), 0) ==
            cfg.constraint_edges.end()) {
            fail("/constraint/edges", "must contain edge 0 (W_0 is fixed)");
        }
    }
    if (auto* ctl = find(doc, "control")) {
        check_keys(*ctl, "/control", {"W"});
        const json* w = find(*ctl, "W");
        if (!w) {
            fail("/control/W", "missing");
        }
        cfg.control_weights = as_numbers(*w, "/control/W");
        if (cfg.control_weights->size() != cfg.N) {
            fail("/control/W", "needs N = " + std::to_string(cfg.N) + " edge weights");
        }
    }
    return cfg;
}

ProblemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path + ": cannot open");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(doc);
}

namespace {

template <class T, class Fn>
T located(const std::string& where, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        fail(where, e.what());
    }
}

}  // namespace

ContinuousInstance build_continuous(const ProblemConfig& cfg) {
    const Grid grid(cfg.grid_cells);
    const CoefficientSpec unit{CoefficientSpec::Form::constant, {1.0}, "/sigma2"};
    const CoefficientSpec& s2 = cfg.sigma2 ? *cfg.sigma2 : unit;
    CoefficientField sigma2 = located<CoefficientField>(s2.where, [&] {
        return CoefficientField(grid, s2.on_cells(grid), FieldRole::variance);
    });
    CoefficientField rate = located<CoefficientField>(cfg.rate->where, [&] {
        return CoefficientField(grid, cfg.rate->on_cells(grid), FieldRole::rate);
    });

    std::vector<double> sprime(grid.n_cells(), 1.0);
    if (cfg.drift) {
        DriftField mu(grid, cfg.drift->on_cells(grid));
        const ScaleDensity s = drift_to_scale(mu, sigma2);
        sprime.assign(s.sprime().begin(), s.sprime().end());
    } else if (cfg.scale) {
        sprime = cfg.scale->on_cells(grid);
    }
    for (double& v : sprime) {
        v *= cfg.scale_factor;
    }
    ScaleDensity s0 = located<ScaleDensity>("/reference", [&] { return ScaleDensity(grid, sprime); });

    ConstraintSet c = ConstraintSet::empty(grid);
    if (cfg.constraint_from && *cfg.constraint_to > *cfg.constraint_from) {
        c = located<ConstraintSet>("/constraint", [&] {
            return ConstraintSet::interval(grid, *cfg.constraint_from, *cfg.constraint_to);
        });
    }
    if (is_discounted(cfg.kind) && grid.node_index(cfg.y) == Grid::npos) {
        fail("/y", "must be a grid node (grid has " + std::to_string(grid.n_cells()) + " cells)");
    }
    std::optional<ScaleDensity> control;
    if (cfg.control_scale) {
        control = located<ScaleDensity>(cfg.control_scale->where, [&] {
            return ScaleDensity(grid, cfg.control_scale->on_cells(grid));
        });
    }
    return ContinuousInstance{grid, sigma2, rate, s0, c, cfg.y, control};
}

DiscreteInstance build_discrete(const ProblemConfig& cfg) {
    const std::size_t N = cfg.N;
    const bool discounted = is_discounted(cfg.kind);
    const std::vector<double> raw = cfg.rate->on_states(N + 1);
    std::optional<DiscreteScale> control;
    if (cfg.control_weights) {
        control = located<DiscreteScale>("/control/W", [&] { return DiscreteScale(*cfg.control_weights); });
    }
    const auto constraint = located<DiscreteConstraint>("/constraint", [&] {
        return discounted ? DiscreteConstraint::prefix(N, static_cast<std::size_t>(cfg.y))
                          : DiscreteConstraint(N, cfg.constraint_edges);
    });

    if (cfg.ctmc) {
        WaitingConversion conv = located<WaitingConversion>(cfg.rate->where, [&] {
            return discounted ? convert_ctmc_discount(*cfg.ctmc, raw)
                              : convert_ctmc_cost(*cfg.ctmc, DiscreteCost(raw));
        });
        DiscreteScale w0 = conv.chain.scale();
        BDChain jump = conv.chain;
        return DiscreteInstance{std::move(w0), std::move(conv.values), constraint,
                                static_cast<std::size_t>(cfg.y), std::move(jump), raw, cfg.ctmc, control};
    }

    DiscreteScale w0 = cfg.weights ? located<DiscreteScale>("/W", [&] { return DiscreteScale(*cfg.weights); })
                                   : DiscreteScale::uniform(N);
    std::vector<double> eps(N + 1, 0.0);
    if (cfg.eps) {
        eps = cfg.eps->on_states(N + 1);
    }
    const BDChain jump = BDChain::from_scale(w0);
    std::vector<double> p(N + 1), q(N + 1);
    for (std::size_t n = 0; n <= N; ++n) {
        p[n] = jump.p(n) * (1.0 - eps[n]);
        q[n] = jump.q(n) * (1.0 - eps[n]);
    }
    BDChain original = located<BDChain>(cfg.eps ? cfg.eps->where : "/W", [&] { return BDChain(p, q, eps); });
    WaitingConversion conv = located<WaitingConversion>(cfg.rate->where, [&] {
        return discounted ? convert_waiting_discount(original, DiscountVector(raw))
                          : convert_waiting_cost(original, DiscreteCost(raw));
    });
    return DiscreteInstance{std::move(w0), std::move(conv.values), constraint,
                            static_cast<std::size_t>(cfg.y), std::move(original), raw, std::nullopt, control};
}

namespace {

void require_number(const json& obj, const char* key, const std::string& where, bool nullable = false) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        fail(where + "/" + key, "missing");
    }
    if (!(it->is_number() || (nullable && it->is_null()))) {
        fail(where + "/" + key, "expected a number");
    }
}

void require_string(const json& obj, const char* key, const std::string& where,
                    std::initializer_list<const char*> choices = {}) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        fail(where + "/" + key, "expected a string");
    }
    if (choices.size() == 0) {
        return;
    }
    for (const char* c : choices) {
        if (it->get<std::string>() == c) {
            return;
        }
    }
    fail(where + "/" + key, "unexpected value '" + it->get<std::string>() + "'");
}

void require_numbers(const json& node, const std::string& where) {
    if (!node.is_array()) {
        fail(where, "expected an array");
    }
    for (std::size_t i = 0; i < node.size(); ++i) {
        if (!node[i].is_number()) {
            fail(where + "/" + std::to_string(i), "expected a number");
        }
    }
}

}  // namespace

void validate_result_document(const json& doc) {
    if (!doc.is_object()) {
        fail("/", "result must be an object");
    }
    auto version = doc.find("schema_version");
    if (version == doc.end() || !version->is_number_integer() || version->get<int>() != kSchemaVersion) {
        fail("/schema_version", "missing or unsupported");
    }
    require_string(doc, "command", "", {"solve", "simulate", "verify"});
    require_string(doc, "kind", "",
                   {"additive-continuous", "discounted-continuous", "additive-discrete", "discounted-discrete"});
    require_string(doc, "status", "", {"ok", "pass", "fail"});
    const std::string command = doc["command"].get<std::string>();

    if (command == "solve") {
        require_number(doc, "value", "");
        auto ctl = doc.find("control");
        if (ctl == doc.end() || !ctl->is_object()) {
            fail("/control", "missing");
        }
        if (ctl->contains("scale_density")) {
            require_numbers((*ctl)["scale_density"], "/control/scale_density");
        } else if (ctl->contains("W")) {
            require_numbers((*ctl)["W"], "/control/W");
        } else {
            fail("/control", "needs scale_density or W");
        }
        auto comp = doc.find("components");
        if (comp == doc.end() || !comp->is_object()) {
            fail("/components", "missing");
        }
        for (const auto& item : comp->items()) {
            if (!item.value().is_number() && !item.value().is_boolean()) {
                fail("/components/" + item.key(), "expected a number or boolean");
            }
        }
    } else if (command == "simulate") {
        auto est = doc.find("estimate");
        if (est == doc.end() || !est->is_object()) {
            fail("/estimate", "missing");
        }
        require_number(*est, "mean", "/estimate", true);
        require_number(*est, "se", "/estimate", true);
        require_number(*est, "replicas", "/estimate");
        require_number(*est, "censored", "/estimate");
        require_string(doc, "functional", "", {"additive", "discounted"});
        require_number(doc, "reference_value", "", true);
    } else {
        auto checks = doc.find("checks");
        if (checks == doc.end() || !checks->is_array()) {
            fail("/checks", "missing");
        }
        for (std::size_t i = 0; i < checks->size(); ++i) {
            const std::string where = "/checks/" + std::to_string(i);
            const json& c = (*checks)[i];
            if (!c.is_object()) {
                fail(where, "expected an object");
            }
            require_string(c, "name", where);
            require_string(c, "verdict", where, {"PASS", "FAIL"});
            require_number(c, "value", where, true);
            require_number(c, "target", where, true);
            require_number(c, "tolerance", where, true);
            require_string(c, "detail", where);
        }
    }
}

}  // namespace shuttle
