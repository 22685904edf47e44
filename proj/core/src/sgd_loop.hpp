// Shared epoch/batch loop for the two autoencoders.
#pragma once

#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "wae/checkpoint.hpp"
#include "wae/errors.hpp"
#include "wae/rng.hpp"
#include "wae/training.hpp"

namespace wae::detail {

struct LoopResult {
  std::vector<float> history;
  int steps = 0;
};

// Model needs train_step(batch) -> float and to_checkpoint().
template <typename Model, typename MakeBatch>
LoopResult run_sgd(Model& model, std::size_t n, const SgdSettings& sgd, const TrainOptions& options,
                   MakeBatch make_batch) {
  if (n == 0) throw PreconditionError("training corpus is empty");
  if (sgd.batch_size < 1 || static_cast<std::size_t>(sgd.batch_size) > n) {
    throw PreconditionError("batch size " + std::to_string(sgd.batch_size) + " must be in [1, corpus size " +
                            std::to_string(n) + "]");
  }
  if (sgd.epochs < 0) throw PreconditionError("epochs must be non-negative");
  LoopResult result;
  std::vector<std::size_t> order(n);
  const std::size_t batch = static_cast<std::size_t>(sgd.batch_size);
  for (int epoch = 0; epoch < sgd.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 rng(derive_seed(sgd.seed, static_cast<std::uint64_t>(epoch) + 1));
    rng.shuffle(order);
    double sum = 0.0;
    std::size_t seen = 0;
    bool stop = false;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      const float loss = model.train_step(make_batch(std::span<const std::size_t>(order).subspan(start, count)));
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "training loss became non-finite at epoch " << epoch << ", step " << result.steps
            << "; learning rate " << sgd.lr << " is likely too high";
        throw TrainingError(msg.str());
      }
      sum += static_cast<double>(loss) * static_cast<double>(count);
      seen += count;
      ++result.steps;
      if (options.max_steps > 0 && result.steps >= options.max_steps) {
        stop = true;
        break;
      }
    }
    const float epoch_loss = static_cast<float>(sum / static_cast<double>(seen));
    result.history.push_back(epoch_loss);
    if (!options.checkpoint_path.empty()) write_checkpoint(options.checkpoint_path, model.to_checkpoint());
    if (options.on_epoch) options.on_epoch(epoch, epoch_loss);
    if (stop) break;
  }
  return result;
}

}  // namespace wae::detail
