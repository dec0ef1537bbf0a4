#include "shuttle/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include "shuttle/errors.hpp"

namespace shuttle {

void SimConfig::validate() const {
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw ConfigError("simulation step h must be positive");
    }
    if (replicas < 1) {
        throw ConfigError("simulation needs at least one replica");
    }
    if (!(max_time > 0.0)) {
        throw ConfigError("simulation max_time must be positive");
    }
    if (max_steps < 1) {
        throw ConfigError("simulation max_steps must be positive");
    }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::mt19937_64 replica_engine(std::uint64_t seed, std::uint64_t replica) {
    const std::uint64_t a = splitmix64(seed);
    const std::uint64_t b = splitmix64(a ^ splitmix64(replica + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32)};
    return std::mt19937_64(seq);
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) {
            s += v;
        }
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(std::span<const double> xs) {
    MeanSe out;
    const std::size_t n = xs.size();
    if (n == 0) {
        out.mean = std::numeric_limits<double>::quiet_NaN();
        out.se = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    out.mean = pairwise_sum(xs) / static_cast<double>(n);
    if (n < 2) {
        out.se = std::numeric_limits<double>::infinity();
        return out;
    }
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = xs[i] - out.mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(n - 1);
    out.se = std::sqrt(var / static_cast<double>(n));
    return out;
}

}  // namespace

EstimateWithCI summarize(std::span<const ReplicaSample> samples, std::ostream* csv) {
    std::vector<double> kept;
    kept.reserve(samples.size());
    EstimateWithCI est;
    if (csv != nullptr) {
        *csv << "replica,value,shuttle_steps_or_time,censored\n";
    }
    for (std::size_t r = 0; r < samples.size(); ++r) {
        const ReplicaSample& s = samples[r];
        if (csv != nullptr) {
            *csv << r << ',' << s.value << ',' << s.duration << ',' << (s.censored ? 1 : 0) << '\n';
        }
        if (s.censored) {
            ++est.censored;
        } else {
            kept.push_back(s.value);
        }
    }
    const MeanSe m = mean_se(kept);
    est.mean = m.mean;
    est.se = m.se;
    est.replicas = kept.size();
    return est;
}

namespace {

template <class T>
std::vector<T> parallel_map(std::size_t count, unsigned threads, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out(count);
    const unsigned workers =
        std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::min<std::size_t>(count, 1024))));
    if (workers == 1) {
        for (std::size_t r = 0; r < count; ++r) {
            out[r] = fn(r);
        }
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                const std::size_t lo = count * t / workers;
                const std::size_t hi = count * (t + 1) / workers;
                for (std::size_t r = lo; r < hi; ++r) {
                    out[r] = fn(r);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

}  // namespace

std::vector<ReplicaSample> run_replicas(const SimConfig& config,
                                        const std::function<ReplicaSample(std::size_t)>& fn) {
    config.validate();
    return parallel_map<ReplicaSample>(config.replicas, config.threads, fn);
}

namespace {

/// Cell data of the natural-scale walk, shared by all replicas.
struct WalkData {
    WalkData(const ScaleDensity& s, const CoefficientField& sigma2, const CoefficientField& rate, double h)
        : grid(s.grid()), h(h) {
        if (!(sigma2.grid() == grid) || !(rate.grid() == grid)) {
            throw ConfigError("simulation: fields live on different grids");
        }
        const std::size_t n = grid.n_cells();
        cum.assign(s.cumulative().begin(), s.cumulative().end());
        sprime.assign(s.sprime().begin(), s.sprime().end());
        rates.assign(rate.values().begin(), rate.values().end());
        coef.resize(n);
        const double sqh = std::sqrt(h);
        for (std::size_t i = 0; i < n; ++i) {
            coef[i] = sprime[i] * std::sqrt(sigma2[i]) * sqh;
        }
        top = cum.back();
    }

    Grid grid;
    double h;
    std::vector<double> cum, sprime, rates, coef;
    double top = 0.0;
};

/// Reflected walk in natural scale: up phase reflects at 0, down phase at the top.
class Walker {
public:
    // stop_at_top halts the walk on the top with the position clamped there.
    Walker(const WalkData& d, bool stop_at_top = false) : d_(&d), stop_at_top_(stop_at_top) {}

    template <class Rng>
    void step(Rng& rng, std::normal_distribution<double>& normal) {
        accrued_ += d_->rates[cell_] * d_->h;
        y_ += d_->coef[cell_] * normal(rng);
        time_ += d_->h;
        if (!after_top_) {
            if (y_ >= d_->top) {
                after_top_ = true;
                max_ = d_->grid.length();
                if (stop_at_top_) {
                    // keep the overshoot: the pre-top Bellman formula is continued past the top
                    after_top_ = false;
                    cell_ = d_->sprime.size() - 1;
                    halted_ = true;
                    return;
                }
            }
        } else if (y_ <= 0.0) {
            done_ = true;
            y_ = 0.0;
            cell_ = 0;
            return;
        }
        fold();
        locate();
        if (!after_top_) {
            max_ = std::max(max_, x());
        }
    }

    double x() const {
        const double v = d_->grid.node(cell_) + (y_ - d_->cum[cell_]) / d_->sprime[cell_];
        return halted_ ? v : std::clamp(v, 0.0, d_->grid.length());
    }

    PathState state() const {
        PathState s;
        s.time = time_;
        s.accrued = accrued_;
        s.x = done_ ? 0.0 : x();
        s.max = max_;
        s.after_top = after_top_;
        s.done = done_;
        return s;
    }

    bool done() const { return done_; }
    bool halted() const { return halted_; }
    double time() const { return time_; }
    double accrued() const { return accrued_; }

private:
    void fold() {
        const double top = d_->top;
        while (y_ < 0.0 || y_ > top) {
            if (y_ < 0.0) {
                y_ = -y_;
            }
            if (y_ > top) {
                y_ = 2.0 * top - y_;
            }
        }
    }

    void locate() {
        const std::size_t n = d_->sprime.size();
        while (cell_ + 1 < n && y_ >= d_->cum[cell_ + 1]) {
            ++cell_;
        }
        while (cell_ > 0 && y_ < d_->cum[cell_]) {
            --cell_;
        }
    }

    const WalkData* d_;
    bool stop_at_top_ = false;
    bool halted_ = false;
    double y_ = 0.0;
    std::size_t cell_ = 0;
    bool after_top_ = false;
    bool done_ = false;
    double max_ = 0.0;
    double accrued_ = 0.0;
    double time_ = 0.0;
};

}  // namespace

bool step_exceeds_grid(const ScaleDensity& s, const CoefficientField& sigma2, double h) {
    double worst = 0.0;
    for (std::size_t i = 0; i < s.grid().n_cells(); ++i) {
        worst = std::max(worst, s[i] * s[i] * sigma2[i]);
    }
    const double w = s.grid().cell_width();
    return h > w * w / worst;
}

std::vector<ReplicaSample> diffusion_shuttle_samples(const ScaleDensity& s, const CoefficientField& sigma2,
                                                     const CoefficientField& rate, Functional functional,
                                                     const SimConfig& config) {
    config.validate();
    const WalkData data(s, sigma2, rate, config.h);
    return run_replicas(config, [&](std::size_t r) {
        Walker w(data);
        auto rng = replica_engine(config.seed, r);
        std::normal_distribution<double> normal(0.0, 1.0);
        ReplicaSample out;
        while (!w.done()) {
            if (w.time() >= config.max_time) {
                out.censored = true;
                break;
            }
            w.step(rng, normal);
        }
        out.duration = w.time();
        out.value = functional == Functional::additive ? w.accrued() : std::exp(-w.accrued());
        return out;
    });
}

EstimateWithCI simulate_diffusion_shuttle(const ScaleDensity& s, const CoefficientField& sigma2,
                                          const CoefficientField& rate, Functional functional,
                                          const SimConfig& config, std::ostream* csv) {
    const auto samples = diffusion_shuttle_samples(s, sigma2, rate, functional, config);
    return summarize(samples, csv);
}

std::vector<PathState> diffusion_window_states(const ScaleDensity& s, const CoefficientField& sigma2,
                                               const CoefficientField& rate, double window,
                                               const SimConfig& config, bool stop_at_top) {
    config.validate();
    const WalkData data(s, sigma2, rate, config.h);
    const auto steps = static_cast<std::size_t>(std::llround(window / config.h));
    return parallel_map<PathState>(config.replicas, config.threads, [&](std::size_t r) {
        Walker w(data, stop_at_top);
        auto rng = replica_engine(config.seed, r);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (std::size_t k = 0; k < steps && !w.done() && !w.halted(); ++k) {
            w.step(rng, normal);
        }
        return w.state();
    });
}

ControlledPath sample_diffusion_path(const ScaleDensity& s, const CoefficientField& sigma2,
                                     const CoefficientField& rate, const SimConfig& config,
                                     std::size_t replica, std::size_t record_every) {
    config.validate();
    if (record_every == 0) {
        throw ConfigError("record_every must be positive");
    }
    const WalkData data(s, sigma2, rate, config.h);
    Walker w(data);
    auto rng = replica_engine(config.seed, replica);
    std::normal_distribution<double> normal(0.0, 1.0);
    ControlledPath path;
    path.control_fingerprint = s.fingerprint();
    auto record = [&] {
        const PathState st = w.state();
        path.times.push_back(st.time);
        path.positions.push_back(st.x);
        path.running_max.push_back(st.max);
        path.accrued.push_back(st.accrued);
        path.after_top.push_back(st.after_top);
    };
    record();
    std::size_t k = 0;
    while (!w.done() && w.time() < config.max_time) {
        const bool was_after = w.state().after_top;
        w.step(rng, normal);
        ++k;
        // always record the step that reaches the top and the final step
        if (k % record_every == 0 || w.done() || (!was_after && w.state().after_top)) {
            record();
        }
    }
    return path;
}

namespace {

struct ChainWalker {
    const BDChain& chain;
    std::span<const double> values;
    Functional functional;
    std::size_t x = 0;
    std::size_t max = 0;
    bool after_top = false;
    bool done = false;
    double accrued = 0.0;
    std::size_t steps = 0;

    void reset() {
        x = 0;
        max = 0;
        after_top = false;
        done = false;
        accrued = functional == Functional::additive ? 0.0 : 1.0;
        steps = 0;
    }

    template <class Rng>
    void step(Rng& rng, std::uniform_real_distribution<double>& u01) {
        if (functional == Functional::additive) {
            accrued += values[x];
        } else {
            accrued *= values[x];
        }
        const double u = u01(rng);
        if (u < chain.p(x)) {
            ++x;
        } else if (u < chain.p(x) + chain.q(x)) {
            --x;
        }
        ++steps;
        max = std::max(max, x);
        if (!after_top && x == chain.N()) {
            after_top = true;
        } else if (after_top && x == 0) {
            done = true;
        }
    }

    PathState state() const {
        PathState s;
        s.time = static_cast<double>(steps);
        s.accrued = accrued;
        s.x = static_cast<double>(x);
        s.max = static_cast<double>(max);
        s.after_top = after_top;
        s.done = done;
        return s;
    }
};

void check_values(const BDChain& chain, std::span<const double> values) {
    if (values.size() != chain.N() + 1) {
        throw ConfigError("chain simulation: need one value per state");
    }
}

}  // namespace

EstimateWithCI simulate_chain_shuttle(const BDChain& chain, std::span<const double> values,
                                      Functional functional, const SimConfig& config, std::ostream* csv) {
    check_values(chain, values);
    const auto samples = run_replicas(config, [&](std::size_t r) {
        ChainWalker w{chain, values, functional};
        w.reset();
        auto rng = replica_engine(config.seed, r);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        ReplicaSample out;
        while (!w.done) {
            if (w.steps >= config.max_steps) {
                out.censored = true;
                break;
            }
            w.step(rng, u01);
        }
        out.value = w.accrued;
        out.duration = static_cast<double>(w.steps);
        return out;
    });
    return summarize(samples, csv);
}

EstimateWithCI simulate_ctmc_shuttle(const CtmcRates& rates, std::span<const double> values,
                                     Functional functional, const SimConfig& config, std::ostream* csv) {
    rates.validate();
    const std::size_t N = rates.N();
    if (values.size() != N + 1) {
        throw ConfigError("ctmc simulation: need one value per state");
    }
    const auto samples = run_replicas(config, [&](std::size_t r) {
        auto rng = replica_engine(config.seed, r);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        ReplicaSample out;
        std::size_t x = 0;
        bool after_top = false;
        double t = 0.0;
        double acc = 0.0;
        while (true) {
            if (t >= config.max_time) {
                out.censored = true;
                break;
            }
            const double total = rates.lambda[x] + rates.mu[x];
            std::exponential_distribution<double> hold(total);
            const double tau = hold(rng);
            acc += values[x] * tau;
            t += tau;
            x = u01(rng) * total < rates.lambda[x] ? x + 1 : x - 1;
            if (!after_top && x == N) {
                after_top = true;
            } else if (after_top && x == 0) {
                break;
            }
        }
        out.value = functional == Functional::additive ? acc : std::exp(-acc);
        out.duration = t;
        return out;
    });
    return summarize(samples, csv);
}

std::vector<PathState> chain_window_states(const BDChain& chain, std::span<const double> values,
                                           Functional functional, std::size_t window_steps,
                                           const SimConfig& config) {
    check_values(chain, values);
    config.validate();
    return parallel_map<PathState>(config.replicas, config.threads, [&](std::size_t r) {
        ChainWalker w{chain, values, functional};
        w.reset();
        auto rng = replica_engine(config.seed, r);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        bool censored = false;
        while (!w.done && (window_steps == 0 || w.steps < window_steps)) {
            if (w.steps >= config.max_steps) {
                censored = true;
                break;
            }
            w.step(rng, u01);
        }
        PathState s = w.state();
        s.censored = censored;
        return s;
    });
}

ChainPath sample_chain_path(const BDChain& chain, std::span<const double> values, Functional functional,
                            const SimConfig& config, std::size_t replica) {
    check_values(chain, values);
    ChainWalker w{chain, values, functional};
    w.reset();
    auto rng = replica_engine(config.seed, replica);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    ChainPath path;
    path.control_fingerprint = scale_fingerprint(chain.scale());
    auto record = [&] {
        path.states.push_back(w.x);
        path.running_max.push_back(w.max);
        path.accrued.push_back(w.accrued);
        path.after_top.push_back(w.after_top);
    };
    record();
    while (!w.done && w.steps < config.max_steps) {
        w.step(rng, u01);
        record();
    }
    return path;
}

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

const char* expectation_name(Expectation e) {
    switch (e) {
    case Expectation::martingale: return "martingale";
    case Expectation::submartingale: return "submartingale";
    case Expectation::supermartingale: return "supermartingale";
    }
    return "?";
}

MartingaleReport martingale_test(double v_start, std::span<const double> v_end, std::size_t censored,
                                 Expectation expected, std::size_t min_replicas) {
    MartingaleReport rep;
    rep.expected = expected;
    rep.replicas = v_end.size();
    rep.censored = censored;
    std::vector<double> inc(v_end.size());
    for (std::size_t i = 0; i < v_end.size(); ++i) {
        inc[i] = v_end[i] - v_start;
    }
    const MeanSe m = mean_se(inc);
    rep.mean_increment = m.mean;
    rep.se = m.se;
    if (m.se > 0.0) {
        rep.z = m.mean / m.se;
    } else {
        rep.z = m.mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), m.mean);
    }
    if (rep.replicas < min_replicas || !std::isfinite(m.mean)) {
        rep.verdict = Verdict::inconclusive;
        return rep;
    }
    switch (expected) {
    case Expectation::martingale:
        rep.verdict = std::abs(rep.z) < 3.0 ? Verdict::pass : Verdict::fail;
        break;
    case Expectation::submartingale:
        rep.verdict = rep.z > 3.0 ? Verdict::pass : (rep.z < -3.0 ? Verdict::fail : Verdict::inconclusive);
        break;
    case Expectation::supermartingale:
        rep.verdict = rep.z < -3.0 ? Verdict::pass : (rep.z > 3.0 ? Verdict::fail : Verdict::inconclusive);
        break;
    }
    return rep;
}

namespace {

MartingaleReport evaluate_windows(const std::vector<PathState>& states, const StateEvaluator& bellman,
                                  const PathState& start, Expectation expected) {
    std::vector<double> ends;
    ends.reserve(states.size());
    std::size_t censored = 0;
    for (const PathState& s : states) {
        if (s.censored) {
            ++censored;
            continue;
        }
        ends.push_back(bellman(s));
    }
    return martingale_test(bellman(start), ends, censored, expected);
}

}  // namespace

MartingaleReport diffusion_martingale_test(const ScaleDensity& s, const CoefficientField& sigma2,
                                           const CoefficientField& rate, const StateEvaluator& bellman,
                                           double window, Expectation expected, const SimConfig& config) {
    const auto states = diffusion_window_states(s, sigma2, rate, window, config, true);
    return evaluate_windows(states, bellman, PathState{}, expected);
}

MartingaleReport chain_martingale_test(const BDChain& chain, std::span<const double> values,
                                       Functional functional, const StateEvaluator& bellman,
                                       std::size_t window_steps, Expectation expected,
                                       const SimConfig& config) {
    const auto states = chain_window_states(chain, values, functional, window_steps, config);
    PathState start;
    start.accrued = functional == Functional::additive ? 0.0 : 1.0;
    return evaluate_windows(states, bellman, start, expected);
}

}  // namespace shuttle
