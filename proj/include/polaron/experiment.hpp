#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "polaron/io.hpp"
#include "polaron/memory_kernel.hpp"

namespace polaron {

enum class ExperimentKind { Travel, Simulate, Stability, Kernel, Dispersive, Supersonic, Sweep };

struct KernelSettings {
    Vec3 v0{0.0, 0.0, 0.2};
    double dt = 0.02;
    double t_max = 80.0;
    double omega_max = 48.0;
    double alias_period = 160.0;
    SphericalQuadrature::Options quadrature{};
};

struct DispersiveSettings {
    int band = 0;
    double t_lo = 1.0, t_hi = 12.0;
    int n_t = 12;
    Vec3 osc_v{0.0, 0.0, 0.2};
    double osc_t_lo = 5.0, osc_t_hi = 50.0;
    int osc_n_t = 16;
};

struct SupersonicSettings {
    Vec3 velocity{0.0, 0.0, 1.5};
    std::vector<int> resolutions{32, 48, 64, 96};
    double spacing = 1.0;
    Vec3 control{0.0, 0.0, 0.5};
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Travel;
    int n = 64;
    double box = 32.0;
    PotentialSpec potential{};
    Vec3 velocity{0.0, 0.0, 0.5};
    PerturbationSpec perturbation{0.01, 1.0, {}};
    double dt = 0.05;
    double T = 20.0;
    int sample_every = 10;
    int snapshot_every = 0;
    KernelSettings kernel{};
    DispersiveSettings dispersive{};
    SupersonicSettings supersonic{};
    // optional units (applied via the paper's (d)/(e) changes of units)
    double mass = 1.0, mu = 1.0, lambda = 1.0;
    std::uint64_t seed = 0;  // recorded in provenance; defaults use no randomness
    std::vector<ExperimentConfig> sweep;

    std::string resolved_json() const;  // full provenance document
    static ExperimentConfig from_json_file(const std::filesystem::path& path);
    static ExperimentConfig from_json_text(const std::string& text);
    void validate() const;  // throws std::invalid_argument with a message
};

struct StabilityReport {
    Vec3 v_infty{};
    Vec3 x_bar0{};
    DecayFit v_fit, x_fit, re_delta_fit, im_delta_fit;
    double window_lo = 0.0, window_hi = 0.0;
    bool subsonic = false;  // |v_infty| < 1
};

struct ExperimentResult {
    std::vector<CheckRecord> records;
    std::vector<std::filesystem::path> files;
    std::optional<StabilityReport> stability;
    bool all_pass = true;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir, int threads = 1);

std::string kind_name(ExperimentKind k);
ExperimentKind kind_from_name(const std::string& name);

}  // namespace polaron
