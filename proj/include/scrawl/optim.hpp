#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "scrawl/params.hpp"
#include "scrawl/rng.hpp"

namespace scrawl::optim {

using num::Matrix;

struct OptConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int batch_size = 32;
    int max_epochs = 20;

    // Plateau schedule: multiply lr by `decay` after `patience` epochs
    // without an improvement of at least `min_improvement`.
    int patience = 3;
    double decay = 0.3;
    double min_improvement = 1e-5;
    double lr_floor = 1e-6;
    enum class Monitor { Loss, Metric } monitor = Monitor::Loss;

    int jobs = 1; // per-sample gradient workers within a batch
};

class AdamState {
public:
    AdamState() = default;
    explicit AdamState(const ParamSet& params);
    long step() const { return step_; }

    friend void adam_step(const ParamSet& params, const std::vector<Matrix>& grads,
                          AdamState& state, const OptConfig& cfg, double lr);

private:
    std::vector<Matrix> m_, v_;
    long step_ = 0;
};

// Bias-corrected Adam. Throws NumericalError (before touching any state)
// if a gradient entry is non-finite.
void adam_step(const ParamSet& params, const std::vector<Matrix>& grads,
               AdamState& state, const OptConfig& cfg, double lr);

inline void adam_step(const ParamSet& params, const std::vector<Matrix>& grads,
                      AdamState& state, const OptConfig& cfg) {
    adam_step(params, grads, state, cfg, cfg.lr);
}

// Learning rate implied by a history of per-epoch monitored values
// (lower-is-better for Loss, higher-is-better for Metric). Pure function
// of the history; non-increasing in its length.
double plateau_schedule(const std::vector<double>& history, const OptConfig& cfg);

struct EpochRecord {
    int epoch = 0;
    double loss = 0.0;
    double metric = 0.0;
    double lr = 0.0;
};

using History = std::vector<EpochRecord>;

std::string history_json_line(const EpochRecord& rec);

struct SampleOutcome {
    double loss = 0.0;
    double metric = 0.0;
};

// Computes one sample's loss/metric and accumulates its (unscaled)
// parameter gradients into `grads`, which parallels the ParamSet order.
using SampleFn = std::function<SampleOutcome(std::size_t index, Rng& rng, std::vector<Matrix>& grads)>;

// Epoch driver: shuffle, mini-batches (the last one may be short),
// averaged gradients, Adam update, plateau-scheduled learning rate.
// Per-sample RNG streams are seeded from `rng` in shuffled order before
// any work is dispatched, so results are identical for any `jobs` value.
History run_epochs(const ParamSet& params, std::size_t corpus_size, const SampleFn& sample_fn,
                   const OptConfig& cfg, AdamState& state, Rng& rng, std::ostream* log = nullptr);

} // namespace scrawl::optim
