#include "scrawl/optim.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

namespace scrawl::optim {

AdamState::AdamState(const ParamSet& params) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
        m_.emplace_back(p.value->rows(), p.value->cols());
        v_.emplace_back(p.value->rows(), p.value->cols());
    }
}

void adam_step(const ParamSet& params, const std::vector<Matrix>& grads,
               AdamState& state, const OptConfig& cfg, double lr) {
    if (params.size() != grads.size()) throw ShapeError("adam_step: gradient count mismatch");
    if (state.m_.empty() && !params.empty()) state = AdamState(params);
    for (std::size_t p = 0; p < params.size(); ++p) {
        if (!params[p].value->same_shape(grads[p]))
            throw ShapeError("adam_step: gradient shape mismatch at " + params[p].name);
        if (!grads[p].all_finite())
            throw NumericalError("adam_step: non-finite gradient at " + params[p].name);
    }
    state.step_ += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step_));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step_));
    for (std::size_t p = 0; p < params.size(); ++p) {
        Matrix& theta = *params[p].value;
        Matrix& m = state.m_[p];
        Matrix& v = state.v_[p];
        const Matrix& g = grads[p];
        for (int i = 0; i < theta.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            const double m_hat = m[i] / bc1;
            const double v_hat = v[i] / bc2;
            theta[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
    }
}

double plateau_schedule(const std::vector<double>& history, const OptConfig& cfg) {
    const double sign = cfg.monitor == OptConfig::Monitor::Loss ? 1.0 : -1.0;
    double lr = cfg.lr;
    double best = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (double raw : history) {
        const double v = sign * raw;
        if (v < best - cfg.min_improvement) {
            best = v;
            stalled = 0;
        } else if (++stalled >= cfg.patience) {
            lr = std::max(lr * cfg.decay, cfg.lr_floor);
            stalled = 0;
        }
    }
    return lr;
}

std::string history_json_line(const EpochRecord& rec) {
    std::ostringstream os;
    os.precision(12);
    os << "{\"epoch\": " << rec.epoch << ", \"loss\": " << rec.loss
       << ", \"metric\": " << rec.metric << ", \"lr\": " << rec.lr << "}";
    return os.str();
}

History run_epochs(const ParamSet& params, std::size_t corpus_size, const SampleFn& sample_fn,
                   const OptConfig& cfg, AdamState& state, Rng& rng, std::ostream* log) {
    if (corpus_size == 0) throw InvalidConfigError("run_epochs: empty corpus");
    if (cfg.batch_size <= 0) throw InvalidConfigError("run_epochs: batch size must be positive");

    History history;
    std::vector<double> monitored;
    const int jobs = std::max(1, cfg.jobs);

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double lr = plateau_schedule(monitored, cfg);
        const auto order = shuffled_indices(corpus_size, rng);

        double loss_sum = 0.0, metric_sum = 0.0;
        for (std::size_t start = 0; start < corpus_size; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t count = std::min(corpus_size - start, static_cast<std::size_t>(cfg.batch_size));

            // Per-sample seeds are drawn up front so the result does not
            // depend on how the work is split across threads.
            std::vector<std::uint64_t> seeds(count);
            for (auto& s : seeds) s = draw_seed(rng);

            std::vector<std::vector<Matrix>> grads;
            std::vector<SampleOutcome> outcomes(count);
            const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), count));
            grads.assign(static_cast<std::size_t>(workers), {});
            for (auto& g : grads) g = zeros_like(params);

            auto work = [&](int worker) {
                for (std::size_t k = static_cast<std::size_t>(worker); k < count; k += static_cast<std::size_t>(workers)) {
                    Rng sample_rng(seeds[k]);
                    outcomes[k] = sample_fn(order[start + k], sample_rng, grads[static_cast<std::size_t>(worker)]);
                }
            };
            if (workers == 1) {
                work(0);
            } else {
                std::vector<std::thread> pool;
                pool.reserve(static_cast<std::size_t>(workers));
                for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
                for (auto& t : pool) t.join();
            }

            std::vector<Matrix>& batch_grads = grads[0];
            for (int w = 1; w < workers; ++w)
                for (std::size_t p = 0; p < batch_grads.size(); ++p)
                    for (int i = 0; i < batch_grads[p].size(); ++i)
                        batch_grads[p][i] += grads[static_cast<std::size_t>(w)][p][i];

            const double inv = 1.0 / static_cast<double>(count);
            for (auto& g : batch_grads)
                for (int i = 0; i < g.size(); ++i) g[i] *= inv;

            adam_step(params, batch_grads, state, cfg, lr);
            for (const auto& out : outcomes) {
                loss_sum += out.loss;
                metric_sum += out.metric;
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = loss_sum / static_cast<double>(corpus_size);
        rec.metric = metric_sum / static_cast<double>(corpus_size);
        rec.lr = lr;
        history.push_back(rec);
        monitored.push_back(cfg.monitor == OptConfig::Monitor::Loss ? rec.loss : rec.metric);
        if (log) *log << history_json_line(rec) << "\n";
    }
    return history;
}

} // namespace scrawl::optim
