// system_model.hpp - Few-level open system: levels, transitions, bath, drives, Hamiltonians
//
// Units: hbar = 1, all frequencies angular. A qubit stores energies -w/2, +w/2;
// larger systems store absolute energies with the ground level at 0.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mebench/control_signals.hpp"
#include "mebench/types.hpp"

namespace mebench {

class LevelSystem {
public:
    explicit LevelSystem(std::vector<double> energies);

    static LevelSystem qubit(double omega);
    // Ground 0, intermediate omega2, top omega (both excited levels decay to 0).
    static LevelSystem vee(double omega, double omega2);

    int dim() const { return static_cast<int>(energies_.size()); }
    double energy(int level) const;
    const std::vector<double>& energies() const { return energies_; }

private:
    std::vector<double> energies_;
};

struct Transition {
    int lower{0};
    int upper{1};
    double g{0.0};
    double frequency{0.0};  // E_upper - E_lower, cached at construction
};

Transition make_transition(const LevelSystem& sys, int lower, int upper, double g);

enum class SpectralDensityKind { Flat };

struct BathSpec {
    double cutoff{0.0};
    SpectralDensityKind density{SpectralDensityKind::Flat};

    // J(w); the flat density integrates to one over [0, cutoff].
    double spectral_density(double w) const;
};

struct DriveSpec {
    int transition{0};
    double omega_d{0.0};
    ControlSignal rabi{ConstantSignal{0.0}};
    ControlSignal phase{ConstantSignal{0.0}};
};

// Replaces the bare frequency of one transition by omega(t); both levels of
// the transition move symmetrically about their bare energies.
struct FrequencyModulation {
    int transition{0};
    ControlSignal signal{ConstantSignal{0.0}};
};

Matrix lowering_operator(const LevelSystem& sys, const Transition& tr);

// gamma = 2 pi g^2 J(w). Throws unless 0 < w < cutoff.
double damping_rate(double g, const BathSpec& bath, double omega);
// Inverse of damping_rate for the flat density.
double coupling_for_rate(double gamma, const BathSpec& bath, double omega);

// Delta = gamma / (2 pi) ln(cutoff / w - 1). Throws unless cutoff > w.
double lamb_shift(double gamma, double omega, const BathSpec& bath);

Matrix bare_hamiltonian(const LevelSystem& sys);

// Omega(t) cos(omega_d t) [cos theta(t) sigma_x + sin theta(t) sigma_y] on the
// driven transition's block, with sigma_x = s + s^dag, sigma_y = i (s - s^dag).
Matrix drive_hamiltonian(double t, const DriveSpec& drive, const LevelSystem& sys,
                         const std::vector<Transition>& transitions, Side side = Side::Right);

// Complete description of the driven open system.
class OpenSystem {
public:
    OpenSystem(LevelSystem levels, std::vector<Transition> transitions, BathSpec bath,
               std::vector<DriveSpec> drives = {},
               std::optional<FrequencyModulation> modulation = std::nullopt);

    const LevelSystem& levels() const { return levels_; }
    const std::vector<Transition>& transitions() const { return transitions_; }
    const BathSpec& bath() const { return bath_; }
    const std::vector<DriveSpec>& drives() const { return drives_; }
    const std::optional<FrequencyModulation>& modulation() const { return modulation_; }
    int dim() const { return levels_.dim(); }

    double rate(std::size_t n) const { return rates_[n]; }
    double shift(std::size_t n) const { return shifts_[n]; }

    // H(t) = H0 (with optional modulated frequency) + all drive terms.
    Matrix hamiltonian(double t, Side side = Side::Right) const;
    // sum_n g_n (sigma_n + sigma_n^dag): the system side of the bath coupling.
    Matrix coupling_operator() const;
    // sum_n Delta_n |k_n><k_n| with shifts from the bare frequencies.
    Matrix lamb_shift_hamiltonian() const;
    // Smallest bare transition frequency; the reference scale for tolerances.
    double reference_frequency() const;

    // Non-degeneracy guard: warnings when some |w_n - w_m| <= factor * max gamma.
    std::vector<std::string> degeneracy_warnings(double factor = 10.0) const;

private:
    LevelSystem levels_;
    std::vector<Transition> transitions_;
    BathSpec bath_;
    std::vector<DriveSpec> drives_;
    std::optional<FrequencyModulation> modulation_;
    std::vector<double> rates_;
    std::vector<double> shifts_;
};

Matrix full_hamiltonian(double t, const OpenSystem& system, Side side = Side::Right);

void to_json(nlohmann::json& j, const BathSpec& bath);
void from_json(const nlohmann::json& j, BathSpec& bath);
void to_json(nlohmann::json& j, const DriveSpec& drive);
void from_json(const nlohmann::json& j, DriveSpec& drive);

} // namespace mebench
