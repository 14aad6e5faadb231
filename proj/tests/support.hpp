#pragma once

#include <chrono>
#include <filesystem>
#include <string>

#include "crownnet/ensemble.hpp"
#include "crownnet/synthforest.hpp"

namespace crownnet::testing {

/// Labelled instances straight from a synthetic forest, using the recorded
/// (possibly noisy) labels and the stems' crown classes.
inline LabeledDataset synth_instances(const SynthDataset& data, const InputConfig& input = {}) {
    LabeledDataset ds;
    ds.input = input;
    for (std::size_t i = 0; i < data.crowns.size(); ++i) {
        Instance inst;
        inst.crown = data.crowns[i];
        inst.label = inst.original_label = data.truth[i].recorded_label;
        inst.crown_class = data.stems[i].crown_class;
        ds.instances.push_back(std::move(inst));
    }
    return ds;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("crownnet_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace crownnet::testing
