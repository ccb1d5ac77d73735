#include "govrek/serialize.hpp"

#include <sstream>

namespace govrek {

using json = nlohmann::json;

json kernel_spec_to_json(const KernelSpec& spec) {
    json j;
    j["family"] = family_name(spec.family);
    if (spec.scope.agent_specific) {
        j["scope"] = {{"kind", "agent_specific"}, {"agent_id", spec.scope.agent_id}};
    } else {
        j["scope"] = {{"kind", "agent_agnostic"}};
    }
    j["sigma"] = spec.sigma;
    j["length_scale"] = spec.length_scale;
    j["period"] = spec.period;
    j["offset_c"] = spec.offset_c;
    j["semi_axes"] = spec.semi_axes;
    j["band_width"] = spec.band_width;
    switch (spec.anchor.kind) {
        case AnchorKind::AgentStart: j["anchor"] = "agent_start"; break;
        case AnchorKind::Goal: j["anchor"] = "goal"; break;
        case AnchorKind::Origin: j["anchor"] = "origin"; break;
        case AnchorKind::Custom: {
            json pt = json::array();
            for (int i = 0; i < spec.anchor.custom_point.dims; ++i)
                pt.push_back(spec.anchor.custom_point[i]);
            j["anchor"] = {{"custom", pt}};
            break;
        }
    }
    j["sign_mode"] = sign_mode_name(spec.sign_mode);
    j["decay"] = spec.decay;
    j["noise_std"] = spec.noise_std;
    j["periodic_standard_form"] = spec.periodic_standard_form;
    return j;
}

KernelSpec kernel_spec_from_json(const json& j) {
    KernelSpec spec;
    spec.family = family_from_name(j.at("family").get<std::string>());
    if (j.contains("scope")) {
        const json& s = j.at("scope");
        if (s.is_string()) {
            if (s.get<std::string>() == "agent_agnostic")
                spec.scope = KernelScope::agnostic();
            else
                throw ConfigError("scope string must be 'agent_agnostic'");
        } else if (s.at("kind").get<std::string>() == "agent_specific") {
            spec.scope = KernelScope::agent(s.at("agent_id").get<int>());
        } else {
            spec.scope = KernelScope::agnostic();
        }
    }
    spec.sigma = j.value("sigma", spec.sigma);
    spec.length_scale = j.value("length_scale", spec.length_scale);
    spec.period = j.value("period", spec.period);
    spec.offset_c = j.value("offset_c", spec.offset_c);
    if (j.contains("semi_axes")) {
        const auto axes = j.at("semi_axes").get<std::vector<double>>();
        if (axes.size() != 3) throw ConfigError("semi_axes must have 3 entries");
        std::copy(axes.begin(), axes.end(), spec.semi_axes.begin());
    }
    spec.band_width = j.value("band_width", spec.band_width);
    if (j.contains("anchor")) {
        const json& a = j.at("anchor");
        if (a.is_string()) {
            const std::string name = a.get<std::string>();
            if (name == "agent_start")
                spec.anchor = Anchor::agent_start();
            else if (name == "goal")
                spec.anchor = Anchor::goal();
            else if (name == "origin")
                spec.anchor = Anchor::origin();
            else
                throw ConfigError("unknown anchor '" + name + "'");
        } else {
            const auto pt = a.at("custom").get<std::vector<double>>();
            Point p;
            p.dims = static_cast<int>(pt.size());
            if (p.dims < 1 || p.dims > 3) throw ConfigError("custom anchor needs 1-3 coordinates");
            for (int i = 0; i < p.dims; ++i) p[i] = pt[static_cast<std::size_t>(i)];
            spec.anchor = Anchor::custom(p);
        }
    }
    if (j.contains("sign_mode")) spec.sign_mode = sign_mode_from_name(j.at("sign_mode").get<std::string>());
    spec.decay = j.value("decay", spec.decay);
    spec.noise_std = j.value("noise_std", spec.noise_std);
    spec.periodic_standard_form = j.value("periodic_standard_form", spec.periodic_standard_form);
    spec.validate();
    return spec;
}

json domain_to_json(const DomainDescriptor& domain) {
    json j;
    j["kind"] = domain.kind == DomainDescriptor::Kind::Grid ? "grid" : "joint_action";
    j["dims"] = domain.dims;
    return j;
}

DomainDescriptor domain_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    const auto dims = j.at("dims").get<std::vector<std::int64_t>>();
    if (kind == "grid") return DomainDescriptor::grid(dims);
    if (kind == "joint_action") {
        if (dims.size() != 1) throw ConfigError("joint_action domain takes a single size");
        return DomainDescriptor::joint_action(dims[0]);
    }
    throw ConfigError("unknown domain kind '" + kind + "'");
}

DomainDescriptor parse_grid_domain(const std::string& text) {
    std::vector<std::int64_t> dims;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, 'x')) {
        try {
            dims.push_back(std::stoll(part));
        } catch (const std::exception&) {
            throw InvalidInput("cannot parse domain '" + text + "'");
        }
    }
    if (dims.empty() || dims.size() > 3) throw InvalidInput("domain must have 1-3 extents");
    return DomainDescriptor::grid(dims);
}

std::string sign_mode_name(SignMode mode) {
    return mode == SignMode::AllPositive ? "all_positive" : "zero_mean";
}

SignMode sign_mode_from_name(const std::string& name) {
    if (name == "all_positive") return SignMode::AllPositive;
    if (name == "zero_mean") return SignMode::ZeroMean;
    throw ConfigError("unknown sign mode '" + name + "'");
}

std::string anchor_name(const Anchor& anchor) {
    switch (anchor.kind) {
        case AnchorKind::AgentStart: return "agent_start";
        case AnchorKind::Goal: return "goal";
        case AnchorKind::Origin: return "origin";
        case AnchorKind::Custom: return "custom";
    }
    return "unknown";
}

} // namespace govrek
