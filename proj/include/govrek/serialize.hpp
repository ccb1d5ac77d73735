#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "govrek/domain.hpp"
#include "govrek/kernel.hpp"

namespace govrek {

// Stable-key JSON round trip for kernel specs; the schema mirrors the
// KernelSpec field names.
nlohmann::json kernel_spec_to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const nlohmann::json& j);

nlohmann::json domain_to_json(const DomainDescriptor& domain);
DomainDescriptor domain_from_json(const nlohmann::json& j);

// Parses dimension strings like "5x5" or "3x3x3".
DomainDescriptor parse_grid_domain(const std::string& text);

std::string sign_mode_name(SignMode mode);
SignMode sign_mode_from_name(const std::string& name);

std::string anchor_name(const Anchor& anchor);

} // namespace govrek
