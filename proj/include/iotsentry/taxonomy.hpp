#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace iotsentry {

enum class TaxonomyLevel { attack34, category10, binary2 };

std::string_view to_string(TaxonomyLevel level);
TaxonomyLevel parse_level(std::string_view text);

/// Attack label -> category -> attack/benign.
struct LabelTaxonomy {
    std::map<std::string, std::string> attack_to_category;
    std::map<std::string, std::string> category_to_binary;

    /// The CICIoT2023 label set: 34 labels in 10 categories.
    static const LabelTaxonomy& ciciot2023();

    /// Throws Error if a map is not total or benign is not unique.
    void validate() const;

    bool knows(const std::string& attack) const { return attack_to_category.count(attack) != 0; }

    /// Name of `attack` at the requested level. Throws on unknown names.
    const std::string& label_at(const std::string& attack, TaxonomyLevel level) const;
};

inline constexpr std::string_view kBenignBinary = "Benign";
inline constexpr std::string_view kAttackBinary = "Attack";

/// The 46 numeric flow features of the CICIoT2023 CSV release, in file order.
const std::vector<std::string>& ciciot2023_feature_names();

}  // namespace iotsentry
