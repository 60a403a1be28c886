#pragma once

#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dominfer/errors.hpp"
#include "dominfer/util.hpp"

namespace dominfer {

// Effective-TLD table backed by a pinned suffix snapshot (one rule per line;
// supports exact rules, `*.` wildcards and `!` exceptions; `//` comments).
// A name with no matching rule is treated as its own registered domain and
// counted, rather than guessed at.
class PublicSuffixTable {
public:
    struct DomainSplit {
        std::string registered;   // 2LD (effective TLD + 1 label)
        std::string third_level;  // registered + 1 label; empty when absent
        bool fallback = false;    // no registrable split; name used as its own 2LD
    };

    static PublicSuffixTable from_stream(std::istream& in) {
        PublicSuffixTable t;
        std::string line;
        while (std::getline(in, line)) {
            auto rule = trim(line);
            if (rule.empty() || rule.substr(0, 2) == "//") continue;
            std::string r = to_lower(rule);
            if (r[0] == '!') {
                t.exceptions_.insert(r.substr(1));
            } else if (r.size() > 2 && r[0] == '*' && r[1] == '.') {
                t.wildcards_.insert(r.substr(2));
            } else {
                t.exact_.insert(r);
            }
        }
        if (t.exact_.empty() && t.wildcards_.empty())
            throw FormatError("public suffix snapshot contains no rules");
        return t;
    }

    static PublicSuffixTable from_file(const std::string& path) {
        std::istringstream in(read_text_file(path));
        return from_stream(in);
    }

    // Longest matching rule wins, except that a matching exception rule
    // prevails outright (it names a registrable domain under a wildcard).
    DomainSplit split(std::string_view fqdn) const {
        std::vector<std::string_view> labels = split_labels(fqdn);
        const int n = static_cast<int>(labels.size());

        int suffix_labels = 0;  // 0 = no rule matched
        bool exception_hit = false;
        for (int start = 0; start < n; ++start) {
            std::string cand = join_from(labels, start);
            if (exceptions_.count(cand)) {
                // The exception itself is registrable: suffix is one label shorter.
                suffix_labels = n - start - 1;
                exception_hit = true;
                break;
            }
        }
        if (!exception_hit) {
            for (int start = 0; start < n; ++start) {
                std::string cand = join_from(labels, start);
                if (exact_.count(cand)) suffix_labels = std::max(suffix_labels, n - start);
                if (start > 0 && wildcards_.count(cand))
                    suffix_labels = std::max(suffix_labels, n - start + 1);
            }
        }

        DomainSplit out;
        if (suffix_labels == 0 || suffix_labels >= n) {
            // Unrecognized, or the name is itself a suffix: use it as its own 2LD.
            out.registered = std::string(fqdn);
            out.fallback = true;
            return out;
        }
        int reg_start = n - suffix_labels - 1;
        out.registered = join_from(labels, reg_start);
        if (reg_start > 0) out.third_level = join_from(labels, reg_start - 1);
        return out;
    }

    std::string registered_domain(std::string_view fqdn) const { return split(fqdn).registered; }

private:
    static std::vector<std::string_view> split_labels(std::string_view s) {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        while (true) {
            auto pos = s.find('.', start);
            if (pos == std::string_view::npos) {
                out.push_back(s.substr(start));
                break;
            }
            out.push_back(s.substr(start, pos - start));
            start = pos + 1;
        }
        return out;
    }

    static std::string join_from(const std::vector<std::string_view>& labels, int start) {
        std::string out;
        for (std::size_t i = static_cast<std::size_t>(start); i < labels.size(); ++i) {
            if (!out.empty()) out.push_back('.');
            out.append(labels[i]);
        }
        return out;
    }

    std::unordered_set<std::string> exact_;
    std::unordered_set<std::string> wildcards_;   // stored without the "*." prefix
    std::unordered_set<std::string> exceptions_;  // stored without the "!" prefix
};

}  // namespace dominfer
