#pragma once

#include <cstdint>
#include <vector>

namespace critnet {

/// n-bit parity p_n[s(t)] = s(t) xor ... xor s(t-n+1) and n-bit sum
/// z_n[s(t)] = s(t) + ... + s(t-n+1). Labels are defined from bin n-1
/// onward; earlier bins are dropped, so labels[i] belongs to bin n-1+i.
std::vector<int> label_parity(const std::vector<int>& s, int n);
std::vector<int> label_sum(const std::vector<int>& s, int n);

enum class TaskKind { parity, sum };

/// Linear readout with an intercept feature. Parity: one unit, decision
/// Theta(w.x - 1/2). Sum: one unit per class, winner-take-all with ties
/// broken toward the smaller class index.
struct Readout {
    TaskKind task = TaskKind::parity;
    int n_classes = 2;
    // weights[unit][feature], last feature is the constant-1 intercept
    std::vector<std::vector<double>> weights;
};

/// Weighted ridge regression (per-sample class-balance weights 1/frequency
/// normalized to mean 1; Tikhonov lambda = 1e-6 scaled by the Gram trace).
/// activity is [neuron][bin] binary; labels aligned with bins.
/// Throws if the training labels contain a single class.
Readout train_readout(const std::vector<std::vector<int>>& activity,
                      const std::vector<int>& labels, TaskKind task);

std::vector<int> predict(const Readout& readout,
                         const std::vector<std::vector<int>>& activity);

struct TaskResult {
    double i_raw = 0.0;       // bits, MI(prediction, truth) on test data
    double i_shuffle = 0.0;   // bits, shuffle-trained baseline
    double i_corrected = 0.0; // i_raw - i_shuffle
    double normalized = 0.0;  // i_corrected / H(test labels)
};

/// Full pipeline: train on (train_activity, train_labels), evaluate on the
/// test segment, and correct with a baseline readout trained on permuted
/// training labels (identical pipeline, permutation from shuffle_seed).
TaskResult run_task(const std::vector<std::vector<int>>& train_activity,
                    const std::vector<int>& train_labels,
                    const std::vector<std::vector<int>>& test_activity,
                    const std::vector<int>& test_labels, TaskKind task,
                    std::uint64_t shuffle_seed);

} // namespace critnet
