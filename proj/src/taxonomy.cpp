#include "iotsentry/taxonomy.hpp"

#include <set>

#include "iotsentry/error.hpp"

namespace iotsentry {

std::string_view to_string(TaxonomyLevel level) {
    switch (level) {
        case TaxonomyLevel::attack34: return "attack34";
        case TaxonomyLevel::category10: return "category10";
        case TaxonomyLevel::binary2: return "binary2";
    }
    return "attack34";
}

TaxonomyLevel parse_level(std::string_view text) {
    if (text == "attack34") return TaxonomyLevel::attack34;
    if (text == "category10") return TaxonomyLevel::category10;
    if (text == "binary2") return TaxonomyLevel::binary2;
    throw Error("unknown taxonomy level '" + std::string(text) +
                "' (expected attack34, category10 or binary2)");
}

namespace {

LabelTaxonomy build_ciciot2023() {
    LabelTaxonomy t;
    const auto add = [&](const char* category, std::initializer_list<const char*> attacks) {
        for (const char* a : attacks) t.attack_to_category.emplace(a, category);
    };
    add("DDoS", {"DDoS-RSTFINFlood", "DDoS-PSHACK_Flood", "DDoS-SYN_Flood", "DDoS-UDP_Flood",
                 "DDoS-TCP_Flood", "DDoS-ICMP_Flood", "DDoS-SynonymousIP_Flood",
                 "DDoS-ACK_Fragmentation", "DDoS-UDP_Fragmentation", "DDoS-ICMP_Fragmentation",
                 "DDoS-SlowLoris", "DDoS-HTTP_Flood"});
    add("DoS", {"DoS-UDP_Flood", "DoS-SYN_Flood", "DoS-TCP_Flood", "DoS-HTTP_Flood"});
    add("Mirai", {"Mirai-greeth_flood", "Mirai-greip_flood", "Mirai-udpplain"});
    add("MITM", {"MITM-ArpSpoofing"});
    add("DNS", {"DNS_Spoofing"});
    add("Recon", {"Recon-PingSweep", "Recon-OSScan", "Recon-PortScan", "Recon-HostDiscovery"});
    add("VulnerabilityScan", {"VulnerabilityScan"});
    add("BruteForce", {"DictionaryBruteForce"});
    add("BenignTraffic", {"BenignTraffic"});
    add("Other", {"SqlInjection", "CommandInjection", "Backdoor_Malware", "Uploading_Attack", "XSS",
                  "BrowserHijacking"});

    for (const auto& [attack, category] : t.attack_to_category) {
        t.category_to_binary[category] =
            std::string(category == "BenignTraffic" ? kBenignBinary : kAttackBinary);
    }
    return t;
}

}  // namespace

const LabelTaxonomy& LabelTaxonomy::ciciot2023() {
    static const LabelTaxonomy taxonomy = [] {
        auto t = build_ciciot2023();
        t.validate();
        return t;
    }();
    return taxonomy;
}

void LabelTaxonomy::validate() const {
    std::set<std::string> categories;
    for (const auto& [attack, category] : attack_to_category) {
        if (!category_to_binary.count(category))
            throw Error("category '" + category + "' of attack '" + attack + "' has no binary mapping");
        categories.insert(category);
    }
    std::size_t benign = 0;
    for (const auto& [category, binary] : category_to_binary) {
        if (binary != kBenignBinary && binary != kAttackBinary)
            throw Error("category '" + category + "' maps to '" + binary + "'");
        if (binary == kBenignBinary) ++benign;
    }
    if (benign != 1) throw Error("taxonomy must have exactly one benign category");
}

const std::string& LabelTaxonomy::label_at(const std::string& attack, TaxonomyLevel level) const {
    const auto it = attack_to_category.find(attack);
    if (it == attack_to_category.end()) throw Error("unknown attack label '" + attack + "'");
    switch (level) {
        case TaxonomyLevel::attack34: return it->first;
        case TaxonomyLevel::category10: return it->second;
        case TaxonomyLevel::binary2: return category_to_binary.at(it->second);
    }
    return it->first;
}

const std::vector<std::string>& ciciot2023_feature_names() {
    static const std::vector<std::string> names = {
        "flow_duration", "Header_Length", "Protocol Type", "Duration", "Rate", "Srate", "Drate",
        "fin_flag_number", "syn_flag_number", "rst_flag_number", "psh_flag_number",
        "ack_flag_number", "ece_flag_number", "cwr_flag_number", "ack_count", "syn_count",
        "fin_count", "urg_count", "rst_count", "HTTP", "HTTPS", "DNS", "Telnet", "SMTP", "SSH",
        "IRC", "TCP", "UDP", "DHCP", "ARP", "ICMP", "IPv", "LLC", "Tot sum", "Min", "Max", "AVG",
        "Std", "Tot size", "IAT", "Number", "Magnitue", "Radius", "Covariance", "Variance",
        "Weight"};
    return names;
}

}  // namespace iotsentry
