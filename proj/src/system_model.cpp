#include "mebench/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mebench {

LevelSystem::LevelSystem(std::vector<double> energies) : energies_(std::move(energies)) {
    require(energies_.size() >= 2, "a level system needs at least two levels");
    for (std::size_t j = 1; j < energies_.size(); ++j)
        require(energies_[j] > energies_[j - 1], "level energies must be strictly increasing");
}

LevelSystem LevelSystem::qubit(double omega) {
    require(omega > 0.0, "qubit frequency must be positive");
    return LevelSystem({-omega / 2.0, omega / 2.0});
}

LevelSystem LevelSystem::vee(double omega, double omega2) {
    require(omega2 > 0.0 && omega2 < omega, "V-system needs 0 < omega2 < omega");
    return LevelSystem({0.0, omega2, omega});
}

double LevelSystem::energy(int level) const {
    require(level >= 0 && level < dim(), "level index out of range");
    return energies_[static_cast<std::size_t>(level)];
}

Transition make_transition(const LevelSystem& sys, int lower, int upper, double g) {
    require(lower >= 0 && upper < sys.dim() && lower < upper,
            "transition indices must satisfy 0 <= lower < upper < dim");
    return Transition{lower, upper, g, sys.energy(upper) - sys.energy(lower)};
}

double BathSpec::spectral_density(double w) const {
    return (w >= 0.0 && w <= cutoff) ? 1.0 / cutoff : 0.0;
}

Matrix lowering_operator(const LevelSystem& sys, const Transition& tr) {
    require(tr.lower >= 0 && tr.upper < sys.dim() && tr.lower < tr.upper,
            "transition indices out of range");
    Matrix s = Matrix::Zero(sys.dim(), sys.dim());
    s(tr.lower, tr.upper) = 1.0;
    return s;
}

double damping_rate(double g, const BathSpec& bath, double omega) {
    if (!(omega > 0.0 && omega < bath.cutoff))
        throw ValidationError("damping rate needs 0 < omega < cutoff");
    return 2.0 * kPi * g * g * bath.spectral_density(omega);
}

double coupling_for_rate(double gamma, const BathSpec& bath, double omega) {
    require(gamma >= 0.0, "damping rate must be non-negative");
    return std::sqrt(gamma / damping_rate(1.0, bath, omega));
}

double lamb_shift(double gamma, double omega, const BathSpec& bath) {
    if (!(bath.cutoff > omega) || !(omega > 0.0))
        throw ValidationError("Lamb shift needs 0 < omega < cutoff");
    return gamma / (2.0 * kPi) * std::log(bath.cutoff / omega - 1.0);
}

Matrix bare_hamiltonian(const LevelSystem& sys) {
    Matrix h = Matrix::Zero(sys.dim(), sys.dim());
    for (int j = 0; j < sys.dim(); ++j) h(j, j) = sys.energy(j);
    return h;
}

Matrix drive_hamiltonian(double t, const DriveSpec& drive, const LevelSystem& sys,
                         const std::vector<Transition>& transitions, Side side) {
    require(drive.transition >= 0 &&
                drive.transition < static_cast<int>(transitions.size()),
            "drive refers to an unknown transition");
    const Transition& tr = transitions[static_cast<std::size_t>(drive.transition)];
    const double amplitude = eval(drive.rabi, t, side) * std::cos(drive.omega_d * t);
    const double theta = eval(drive.phase, t, side);
    const Matrix s = lowering_operator(sys, tr);
    const Matrix sx = s + s.adjoint();
    const Matrix sy = kI * (s - s.adjoint());
    return amplitude * (std::cos(theta) * sx + std::sin(theta) * sy);
}

OpenSystem::OpenSystem(LevelSystem levels, std::vector<Transition> transitions, BathSpec bath,
                       std::vector<DriveSpec> drives,
                       std::optional<FrequencyModulation> modulation)
    : levels_(std::move(levels)),
      transitions_(std::move(transitions)),
      bath_(bath),
      drives_(std::move(drives)),
      modulation_(std::move(modulation)) {
    require(bath_.cutoff > 0.0, "bath cutoff must be positive");
    for (auto& tr : transitions_) {
        const Transition checked = make_transition(levels_, tr.lower, tr.upper, tr.g);
        tr.frequency = checked.frequency;
        require(bath_.cutoff > tr.frequency, "bath cutoff must exceed every transition frequency");
        rates_.push_back(damping_rate(tr.g, bath_, tr.frequency));
        shifts_.push_back(lamb_shift(rates_.back(), tr.frequency, bath_));
    }
    std::set<int> driven_transitions;
    std::set<int> driven_levels;
    for (const auto& d : drives_) {
        require(d.transition >= 0 && d.transition < static_cast<int>(transitions_.size()),
                "drive refers to an unknown transition");
        require(d.omega_d > 0.0, "drive carrier frequency must be positive");
        require(driven_transitions.insert(d.transition).second,
                "at most one drive per transition");
        const auto& tr = transitions_[static_cast<std::size_t>(d.transition)];
        require(driven_levels.insert(tr.lower).second && driven_levels.insert(tr.upper).second,
                "driven transitions must not share a level");
    }
    if (modulation_) {
        require(modulation_->transition >= 0 &&
                    modulation_->transition < static_cast<int>(transitions_.size()),
                "frequency modulation refers to an unknown transition");
    }
}

Matrix OpenSystem::hamiltonian(double t, Side side) const {
    Matrix h = bare_hamiltonian(levels_);
    if (modulation_) {
        const auto& tr = transitions_[static_cast<std::size_t>(modulation_->transition)];
        const double offset = eval(modulation_->signal, t, side) - tr.frequency;
        h(tr.lower, tr.lower) -= offset / 2.0;
        h(tr.upper, tr.upper) += offset / 2.0;
    }
    for (const auto& d : drives_) h += drive_hamiltonian(t, d, levels_, transitions_, side);
    return h;
}

Matrix OpenSystem::coupling_operator() const {
    Matrix x = Matrix::Zero(dim(), dim());
    for (const auto& tr : transitions_) {
        const Matrix s = lowering_operator(levels_, tr);
        x += tr.g * (s + s.adjoint());
    }
    return x;
}

Matrix OpenSystem::lamb_shift_hamiltonian() const {
    Matrix h = Matrix::Zero(dim(), dim());
    for (std::size_t n = 0; n < transitions_.size(); ++n)
        h(transitions_[n].upper, transitions_[n].upper) += shifts_[n];
    return h;
}

double OpenSystem::reference_frequency() const {
    double ref = levels_.energy(dim() - 1) - levels_.energy(0);
    for (const auto& tr : transitions_) ref = std::min(ref, tr.frequency);
    return ref;
}

std::vector<std::string> OpenSystem::degeneracy_warnings(double factor) const {
    std::vector<std::string> out;
    const double max_rate =
        rates_.empty() ? 0.0 : *std::max_element(rates_.begin(), rates_.end());
    for (std::size_t n = 0; n < transitions_.size(); ++n) {
        for (std::size_t m = n + 1; m < transitions_.size(); ++m) {
            const double gap = std::abs(transitions_[n].frequency - transitions_[m].frequency);
            if (gap <= factor * max_rate) {
                std::ostringstream msg;
                msg << "transitions " << n << " and " << m << " are within " << factor
                    << " damping rates of each other (gap " << gap << ")";
                out.push_back(msg.str());
            }
        }
    }
    return out;
}

Matrix full_hamiltonian(double t, const OpenSystem& system, Side side) {
    return system.hamiltonian(t, side);
}

void to_json(nlohmann::json& j, const BathSpec& bath) {
    j = {{"cutoff", bath.cutoff}, {"density", "flat"}};
}

void from_json(const nlohmann::json& j, BathSpec& bath) {
    bath.cutoff = j.at("cutoff").get<double>();
    const auto density = j.value("density", std::string("flat"));
    require(density == "flat", "only the flat spectral density is supported");
    bath.density = SpectralDensityKind::Flat;
}

void to_json(nlohmann::json& j, const DriveSpec& drive) {
    j = {{"transition", drive.transition},
         {"omega_d", drive.omega_d},
         {"rabi", drive.rabi},
         {"phase", drive.phase}};
}

void from_json(const nlohmann::json& j, DriveSpec& drive) {
    drive.transition = j.value("transition", 0);
    drive.omega_d = j.at("omega_d").get<double>();
    drive.rabi = j.at("rabi").get<ControlSignal>();
    drive.phase = j.contains("phase") ? j.at("phase").get<ControlSignal>()
                                      : ControlSignal{ConstantSignal{0.0}};
}

} // namespace mebench
