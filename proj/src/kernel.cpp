#include "govrek/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace govrek {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool finite_point(const Point& p) {
    for (int i = 0; i < p.dims; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

// Distance from p to the line x = y = z.
double diagonal_distance(const Point& p) {
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    const double t = (p[0] + p[1] + p[2]) * inv_sqrt3;
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double d = p[i] - t * inv_sqrt3;
        s += d * d;
    }
    return std::sqrt(s);
}

// First-order approximation |f| / |grad f| of the Euclidean distance to the
// implicit surface f = 0. Good to within a cell at grid resolution.
double implicit_surface_distance(double f, double gx, double gy, double gz) {
    const double grad = std::sqrt(gx * gx + gy * gy + gz * gz);
    if (grad < 1e-12) return std::abs(f) < 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(f) / grad;
}

double surface_distance(const KernelSpec& spec, const Point& rel) {
    switch (spec.family) {
        case KernelFamily::Diagonal:
            return diagonal_distance(rel);
        case KernelFamily::Ellipsoid: {
            const auto& ax = spec.semi_axes;
            const double f = rel[0] * rel[0] / (ax[0] * ax[0]) + rel[1] * rel[1] / (ax[1] * ax[1]) +
                             rel[2] * rel[2] / (ax[2] * ax[2]) - 1.0;
            return implicit_surface_distance(f, 2.0 * rel[0] / (ax[0] * ax[0]),
                                             2.0 * rel[1] / (ax[1] * ax[1]),
                                             2.0 * rel[2] / (ax[2] * ax[2]));
        }
        case KernelFamily::Hyperboloid: {
            const auto& ax = spec.semi_axes;
            const double f = rel[0] * rel[0] / (ax[0] * ax[0]) + rel[1] * rel[1] / (ax[1] * ax[1]) -
                             rel[2] * rel[2] / (ax[2] * ax[2]) - 1.0;
            return implicit_surface_distance(f, 2.0 * rel[0] / (ax[0] * ax[0]),
                                             2.0 * rel[1] / (ax[1] * ax[1]),
                                             -2.0 * rel[2] / (ax[2] * ax[2]));
        }
        default:
            throw InvalidInput("not a surface family");
    }
}

// Taper from sigma^2 on the surface down to 0 at band_width away.
double tapered_band_value(const KernelSpec& spec, double dist) {
    const double amp = spec.sigma * spec.sigma;
    if (spec.band_width <= 0.0) return dist <= 1e-9 ? amp : 0.0;
    if (dist >= spec.band_width) return 0.0;
    return amp * (1.0 - dist / spec.band_width);
}

Point resolve_anchor(const KernelSpec& spec, const AnchorContext& context) {
    switch (spec.anchor.kind) {
        case AnchorKind::AgentStart: {
            if (!spec.scope.agent_specific)
                throw MissingContext("AgentStart anchor requires an agent-specific scope");
            const int id = spec.scope.agent_id;
            if (id < 0 || id >= static_cast<int>(context.agent_starts.size()))
                throw MissingContext("no start position for agent " + std::to_string(id));
            return context.agent_starts[static_cast<std::size_t>(id)];
        }
        case AnchorKind::Goal:
            if (!context.goal) throw MissingContext("anchor Goal requested but context has no goal");
            return *context.goal;
        case AnchorKind::Origin:
            return Point{};
        case AnchorKind::Custom:
            return spec.anchor.custom_point;
    }
    throw InvalidInput("unknown anchor kind");
}

} // namespace

bool is_surface_family(KernelFamily family) {
    return family == KernelFamily::Diagonal || family == KernelFamily::Ellipsoid ||
           family == KernelFamily::Hyperboloid;
}

std::string family_name(KernelFamily family) {
    switch (family) {
        case KernelFamily::Linear: return "linear";
        case KernelFamily::Periodic: return "periodic";
        case KernelFamily::SquaredExponential: return "squared_exponential";
        case KernelFamily::Diagonal: return "diagonal";
        case KernelFamily::Ellipsoid: return "ellipsoid";
        case KernelFamily::Hyperboloid: return "hyperboloid";
    }
    return "unknown";
}

KernelFamily family_from_name(const std::string& name) {
    if (name == "linear") return KernelFamily::Linear;
    if (name == "periodic") return KernelFamily::Periodic;
    if (name == "squared_exponential" || name == "se") return KernelFamily::SquaredExponential;
    if (name == "diagonal") return KernelFamily::Diagonal;
    if (name == "ellipsoid") return KernelFamily::Ellipsoid;
    if (name == "hyperboloid") return KernelFamily::Hyperboloid;
    throw InvalidInput("unknown kernel family '" + name + "'");
}

void KernelSpec::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidInput("sigma must be positive");
    if (!(length_scale > 0.0) || !std::isfinite(length_scale))
        throw InvalidInput("length_scale must be positive");
    if (!(period > 0.0) || !std::isfinite(period)) throw InvalidInput("period must be positive");
    if (!std::isfinite(offset_c)) throw InvalidInput("offset_c must be finite");
    for (double a : semi_axes)
        if (!(a > 0.0) || !std::isfinite(a)) throw InvalidInput("semi_axes must be positive");
    if (!(band_width >= 0.0) || !std::isfinite(band_width))
        throw InvalidInput("band_width must be non-negative");
    if (!(decay >= 0.0 && decay <= 1.0)) throw InvalidInput("decay must be in [0, 1]");
    if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
        throw InvalidInput("noise_std must be non-negative");
    if (scope.agent_specific && scope.agent_id < 0)
        throw InvalidInput("agent-specific scope needs a non-negative agent id");
}

bool KernelSpec::admits_dims(int ndim) const {
    if (is_surface_family(family)) return ndim == 3;
    return ndim == 1 || ndim == 2;
}

double eval_kernel(const KernelSpec& spec, const Point& x, const Point& x_ref) {
    spec.validate();
    if (x.dims != x_ref.dims) throw DomainMismatch("point ranks differ");
    if (!spec.admits_dims(x.dims))
        throw DomainMismatch(family_name(spec.family) + " kernel cannot evaluate " +
                             std::to_string(x.dims) + "D points");
    if (!finite_point(x) || !finite_point(x_ref)) throw InvalidInput("non-finite point");

    const double amp = spec.sigma * spec.sigma;
    switch (spec.family) {
        case KernelFamily::Linear: {
            double s = 0.0;
            for (int i = 0; i < x.dims; ++i)
                s += (x[i] - spec.offset_c) * (x_ref[i] - spec.offset_c);
            return amp * s;
        }
        case KernelFamily::Periodic: {
            const double d2 = squared_distance(x, x_ref);
            const double arg = spec.periodic_standard_form ? std::sqrt(d2) : d2;
            const double sn = std::sin(kPi * arg / spec.period);
            return amp * std::exp(-2.0 * sn * sn / (spec.length_scale * spec.length_scale));
        }
        case KernelFamily::SquaredExponential: {
            const double d2 = squared_distance(x, x_ref);
            return amp * std::exp(-d2 / (2.0 * spec.length_scale * spec.length_scale));
        }
        case KernelFamily::Diagonal:
        case KernelFamily::Ellipsoid:
        case KernelFamily::Hyperboloid: {
            Point rel;
            rel.dims = 3;
            for (int i = 0; i < 3; ++i) rel[i] = x[i] - x_ref[i];
            return tapered_band_value(spec, surface_distance(spec, rel));
        }
    }
    throw InvalidInput("unknown kernel family");
}

RewardField build_reward_field(const KernelSpec& spec, const DomainDescriptor& domain,
                               const AnchorContext& context, std::uint64_t noise_seed) {
    spec.validate();
    if (!spec.admits_dims(domain.ndim()))
        throw DomainMismatch(family_name(spec.family) + " kernel is not admissible on " +
                             domain.to_string());
    Point anchor = resolve_anchor(spec, context);
    if (anchor.dims == 0) anchor.dims = domain.ndim(); // Origin adopts the domain rank
    if (anchor.dims != domain.ndim()) throw DomainMismatch("anchor rank does not match domain");

    RewardField field;
    field.domain = domain;
    field.owner_agent = spec.scope.agent_specific ? spec.scope.agent_id : -1;
    field.decay = spec.decay;
    const std::int64_t n = domain.cell_count();
    field.values.resize(static_cast<std::size_t>(n));
    field.visit_decay.assign(static_cast<std::size_t>(n), 1.0);

    Rng noise(derive_seed(noise_seed, {0x6e6f697365ULL}));
    for (std::int64_t cell = 0; cell < n; ++cell) {
        double v = eval_kernel(spec, domain.cell_point(cell), anchor);
        if (spec.noise_std > 0.0) v += noise.uniform(-spec.noise_std, spec.noise_std);
        field.values[static_cast<std::size_t>(cell)] = v;
    }
    return field;
}

double RewardField::sum() const {
    return std::accumulate(values.begin(), values.end(), 0.0);
}

RewardField normalize_field(const RewardField& field, int n_agents, SignMode sign_mode) {
    if (n_agents < 1) throw InvalidInput("n_agents must be >= 1");
    RewardField out = field;
    out.reset_decay();

    const double min_v = *std::min_element(out.values.begin(), out.values.end());
    if (min_v < 0.0)
        for (double& v : out.values) v -= min_v;

    const double total = out.sum();
    if (!(total > 0.0))
        throw DegenerateField("field sums to zero after shift; cannot normalize");

    const double scale = 1.0 / (total * static_cast<double>(n_agents));
    for (double& v : out.values) v *= scale;

    if (sign_mode == SignMode::ZeroMean) {
        const double mean = out.sum() / static_cast<double>(out.values.size());
        for (double& v : out.values) v -= mean;
    }

    out.normalized_for = n_agents;
    out.normalized_sign = sign_mode;
    return out;
}

RewardField superimpose(const std::vector<RewardField>& fields, int n_agents) {
    if (fields.empty()) throw InvalidInput("superimpose needs at least one field");
    const RewardField& first = fields.front();
    for (const RewardField& f : fields) {
        if (!(f.domain == first.domain)) throw DomainMismatch("superimpose: domains differ");
        if (f.owner_agent != first.owner_agent) throw DomainMismatch("superimpose: owners differ");
    }

    RewardField merged;
    merged.domain = first.domain;
    merged.owner_agent = first.owner_agent;
    merged.values.assign(first.values.size(), 0.0);
    merged.visit_decay.assign(first.values.size(), 1.0);
    merged.decay = first.decay;
    for (const RewardField& f : fields) {
        merged.decay = std::min(merged.decay, f.decay);
        for (std::size_t i = 0; i < f.values.size(); ++i) merged.values[i] += f.values[i];
    }

    const SignMode mode = first.normalized_sign.value_or(SignMode::AllPositive);
    return normalize_field(merged, n_agents, mode);
}

namespace {

enum class MutableParam { Sigma, LengthScale, Period, OffsetC, SemiAxis0, SemiAxis1, SemiAxis2, BandWidth, Decay };

std::vector<MutableParam> mutable_params(KernelFamily family) {
    switch (family) {
        case KernelFamily::Linear:
            return {MutableParam::Sigma, MutableParam::OffsetC, MutableParam::Decay};
        case KernelFamily::Periodic:
            return {MutableParam::Sigma, MutableParam::LengthScale, MutableParam::Period, MutableParam::Decay};
        case KernelFamily::SquaredExponential:
            return {MutableParam::Sigma, MutableParam::LengthScale, MutableParam::Decay};
        case KernelFamily::Diagonal:
            return {MutableParam::Sigma, MutableParam::BandWidth, MutableParam::Decay};
        case KernelFamily::Ellipsoid:
        case KernelFamily::Hyperboloid:
            return {MutableParam::Sigma, MutableParam::SemiAxis0, MutableParam::SemiAxis1,
                    MutableParam::SemiAxis2, MutableParam::BandWidth, MutableParam::Decay};
    }
    return {MutableParam::Sigma, MutableParam::Decay};
}

// Applies the multiplicative perturbation to the chosen parameter, clamped to
// its validity range. Returns false when clamping left the value unchanged.
bool apply_mutation(KernelSpec& spec, MutableParam param, double factor) {
    auto scale_pos = [&](double& v) {
        const double next = std::max(1e-6, v * factor);
        const bool changed = next != v;
        v = next;
        return changed;
    };
    switch (param) {
        case MutableParam::Sigma: return scale_pos(spec.sigma);
        case MutableParam::LengthScale: return scale_pos(spec.length_scale);
        case MutableParam::Period: return scale_pos(spec.period);
        case MutableParam::OffsetC: {
            const double next = spec.offset_c * factor;
            const bool changed = next != spec.offset_c;
            spec.offset_c = next;
            return changed;
        }
        case MutableParam::SemiAxis0: return scale_pos(spec.semi_axes[0]);
        case MutableParam::SemiAxis1: return scale_pos(spec.semi_axes[1]);
        case MutableParam::SemiAxis2: return scale_pos(spec.semi_axes[2]);
        case MutableParam::BandWidth: {
            const double next = std::max(0.0, spec.band_width * factor);
            const bool changed = next != spec.band_width;
            spec.band_width = next;
            return changed;
        }
        case MutableParam::Decay: {
            const double next = std::clamp(spec.decay * factor, 0.0, 1.0);
            const bool changed = next != spec.decay;
            spec.decay = next;
            return changed;
        }
    }
    return false;
}

} // namespace

KernelSpec mutate(const KernelSpec& spec, Rng& rng, double m) {
    if (m < 0.0 || m > 1.0) throw InvalidInput("mutation probability must be in [0, 1]");
    if (!rng.bernoulli(m)) return spec;

    const std::vector<MutableParam> params = mutable_params(spec.family);
    // Retry when clamping leaves the chosen parameter unchanged (e.g. decay
    // already saturated at a bound).
    for (int attempt = 0; attempt < 16; ++attempt) {
        KernelSpec mutated = spec;
        const MutableParam param = params[static_cast<std::size_t>(rng.uniform_int(params.size()))];
        const double factor = rng.uniform(0.5, 2.0);
        if (apply_mutation(mutated, param, factor)) {
            mutated.validate();
            return mutated;
        }
    }
    return spec;
}

std::vector<KernelSpec> sample_kernel_population(int n, const DomainDescriptor& domain,
                                                 const std::vector<KernelScope>& scopes, Rng& rng) {
    if (n < 1) throw InvalidInput("population size must be >= 1");
    if (scopes.empty()) throw InvalidInput("at least one scope is required");

    std::vector<KernelFamily> families;
    if (domain.ndim() == 3)
        families = {KernelFamily::Diagonal, KernelFamily::Ellipsoid, KernelFamily::Hyperboloid};
    else
        families = {KernelFamily::Linear, KernelFamily::Periodic, KernelFamily::SquaredExponential};

    const double max_dim = static_cast<double>(domain.max_extent());
    const double domain_span = static_cast<double>(domain.cell_count());
    const std::vector<double> decay_choices{1.0, 0.5, 0.25, 0.0};

    std::vector<KernelSpec> population;
    population.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        KernelSpec spec;
        spec.family = rng.pick(families);
        spec.scope = scopes[static_cast<std::size_t>(i) % scopes.size()];
        spec.sigma = rng.uniform(0.5, 2.0);
        spec.length_scale = rng.uniform(0.5, std::max(0.5, max_dim));
        spec.period = rng.uniform(2.0, std::max(2.0, domain_span));
        // A zero offset with a zero anchor collapses the linear kernel to an
        // all-zero field, so draw away from zero.
        spec.offset_c = (rng.bernoulli(0.5) ? 1.0 : -1.0) * rng.uniform(0.5, 2.0);
        for (double& a : spec.semi_axes) a = rng.uniform(1.0, std::max(1.0, max_dim));
        spec.band_width = 1.0;
        spec.decay = rng.pick(decay_choices);
        spec.sign_mode = rng.bernoulli(0.5) ? SignMode::AllPositive : SignMode::ZeroMean;
        if (spec.scope.agent_specific) {
            spec.anchor = Anchor::agent_start();
        } else {
            spec.anchor = rng.bernoulli(0.5) ? Anchor::goal() : Anchor::origin();
        }
        spec.validate();
        population.push_back(spec);
    }
    return population;
}

} // namespace govrek
