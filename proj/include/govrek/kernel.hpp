#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "govrek/domain.hpp"
#include "govrek/rng.hpp"

namespace govrek {

enum class KernelFamily { Linear, Periodic, SquaredExponential, Diagonal, Ellipsoid, Hyperboloid };

enum class SignMode { AllPositive, ZeroMean };

enum class AnchorKind { AgentStart, Goal, Origin, Custom };

// Reference point the field is evaluated against. AgentStart resolves to the
// owning agent's initial position, Goal to the task goal (for joint-action
// domains, the full-cooperation corner).
struct Anchor {
    AnchorKind kind = AnchorKind::Origin;
    Point custom_point; // only for Custom

    static Anchor agent_start() { return {AnchorKind::AgentStart, {}}; }
    static Anchor goal() { return {AnchorKind::Goal, {}}; }
    static Anchor origin() { return {AnchorKind::Origin, {}}; }
    static Anchor custom(Point p) { return {AnchorKind::Custom, p}; }
};

struct KernelScope {
    bool agent_specific = false;
    int agent_id = -1; // valid iff agent_specific

    static KernelScope agent(int id) { return {true, id}; }
    static KernelScope agnostic() { return {false, -1}; }
};

// Declarative description of one governance kernel.
struct KernelSpec {
    KernelFamily family = KernelFamily::SquaredExponential;
    KernelScope scope = KernelScope::agnostic();
    double sigma = 1.0;          // amplitude scale (squared in the formulas)
    double length_scale = 1.0;   // l
    double period = 4.0;         // p
    double offset_c = 0.0;       // c in the linear kernel
    std::array<double, 3> semi_axes{1.0, 1.0, 1.0};
    double band_width = 1.0;     // taper width around 3D surfaces, in cells
    Anchor anchor = Anchor::origin();
    SignMode sign_mode = SignMode::AllPositive;
    double decay = 1.0;          // per-visit retention factor; 1 = no decay
    double noise_std = 0.0;      // half-width of the uniform field noise
    bool periodic_standard_form = false; // use |x-x'| instead of |x-x'|^2

    // Throws InvalidInput when any parameter is outside its valid range.
    void validate() const;

    // True when the family can be evaluated on a domain of this rank.
    bool admits_dims(int ndim) const;
};

bool is_surface_family(KernelFamily family);
std::string family_name(KernelFamily family);
KernelFamily family_from_name(const std::string& name);

enum class FieldOwner : std::int8_t { Shared = -1 };

// Normalized (or raw) scalar field over a domain; the runtime form of a kernel.
// owner_agent == -1 means the field is shared across agents.
struct RewardField {
    DomainDescriptor domain;
    int owner_agent = -1;
    std::vector<double> values;
    std::optional<int> normalized_for;          // n_agents used in normalization
    std::optional<SignMode> normalized_sign;    // sign mode of last normalization
    double decay = 1.0;                          // per-visit retention factor
    std::vector<double> visit_decay;             // one multiplier per cell, starts at 1

    bool shared() const { return owner_agent < 0; }

    double effective_value(std::int64_t cell) const {
        check_cell(cell);
        return values[static_cast<std::size_t>(cell)] * visit_decay[static_cast<std::size_t>(cell)];
    }

    // Multiplies the cell's retention factor by the field's decay. Call once
    // per visit, after the visit's reward has been collected.
    void apply_decay(std::int64_t cell) {
        check_cell(cell);
        visit_decay[static_cast<std::size_t>(cell)] *= decay;
    }

    void reset_decay() { std::fill(visit_decay.begin(), visit_decay.end(), 1.0); }

    double sum() const;

private:
    void check_cell(std::int64_t cell) const {
        if (cell < 0 || cell >= static_cast<std::int64_t>(values.size()))
            throw DomainMismatch("cell " + std::to_string(cell) + " outside " + domain.to_string());
    }
};

// Data needed to resolve anchors when building a field.
struct AnchorContext {
    std::vector<Point> agent_starts;
    std::optional<Point> goal;
};

// Raw kernel value at x against reference x_ref, per the kernel family formula.
double eval_kernel(const KernelSpec& spec, const Point& x, const Point& x_ref);

// Evaluates the kernel at every cell of the domain against the resolved
// anchor; adds seeded uniform noise when noise_std > 0. The result is raw
// (not normalized).
RewardField build_reward_field(const KernelSpec& spec, const DomainDescriptor& domain,
                               const AnchorContext& context, std::uint64_t noise_seed = 0);

// AllPositive: shift so min >= 0, then divide by (sum * n_agents); the result
// sums to 1/n_agents. ZeroMean: AllPositive-normalize first, then subtract the
// mean; the result sums to 0.
RewardField normalize_field(const RewardField& field, int n_agents, SignMode sign_mode);

// Element-wise sum followed by normalize_field. All inputs must share domain
// and owner; the first field's sign mode (AllPositive for raw fields) and the
// smallest decay among the inputs carry over.
RewardField superimpose(const std::vector<RewardField>& fields, int n_agents);

// With probability m, returns a copy with one family-relevant continuous
// parameter scaled by a uniform factor in [0.5, 2], clamped to validity.
KernelSpec mutate(const KernelSpec& spec, Rng& rng, double m);

// Draws n specs admissible for the domain, cycling scopes in the given order.
std::vector<KernelSpec> sample_kernel_population(int n, const DomainDescriptor& domain,
                                                 const std::vector<KernelScope>& scopes, Rng& rng);

} // namespace govrek
