#ifndef LRT_CONFIG_HPP
#define LRT_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrt/models.hpp"
#include "lrt/rank_adapt.hpp"
#include "lrt/tdvp.hpp"

namespace lrt {

// Configuration problems carry the offending line so the driver can print
// "file:line" diagnostics and exit with the usage status.
struct ConfigError : std::runtime_error {
    int line;
    ConfigError(const std::string& msg, int at) : std::runtime_error(msg), line(at) {}
};

// Parsed nested key-value text:
//   key = value            # comment
//   section {
//     list = [a, b, c]
//   }
// Typed accessors mark entries as consumed; check_all_used() then rejects
// anything a schema never asked for, which is how unknown keys are caught.
class ConfigNode {
public:
    struct Entry {
        std::string value;
        int line = 0;
        mutable bool used = false;
    };

    std::map<std::string, Entry> values;
    std::map<std::string, ConfigNode> sections;
    int line = 0;

    bool has(const std::string& key) const { return values.count(key) != 0; }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::size_t get_size(const std::string& key) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<std::string> get_string_list(const std::string& key) const;

    // nullptr when the section is absent
    const ConfigNode* section(const std::string& key) const;

    // create or overwrite a value through a dotted path like "model.G"
    void set_path(const std::string& dotted, const std::string& value);

    // throws ConfigError on the first entry no accessor ever consumed
    void check_all_used(const std::string& prefix = "") const;

private:
    const Entry& require(const std::string& key) const;
};

ConfigNode parse_config_text(std::istream& is);
ConfigNode parse_config_file(const std::string& path);

// Re-serialize a tree in the same format it was parsed from.
void write_config_text(std::ostream& os, const ConfigNode& node, int indent = 0);

// Everything one integration needs, assembled and validated from a tree.
struct RunSetup {
    std::string engine;  // lrtdvp | oracle | baseline
    ModelBundle bundle;
    std::vector<Observable> observables;  // post filter
    SolverConfig solver;
    bool rank_adaptive = false;
    RankPolicy policy;
    double baseline_dt = 0.0;
    double baseline_eps = 0.0;
    std::size_t baseline_M_min = 1;
    std::size_t baseline_M_max = 0;
    std::string prefix = "run";
    bool write_final_state = false;
    std::uint64_t seed = 1;
};

RunSetup load_run_setup(const ConfigNode& root);

struct SweepSpec {
    bool active = false;
    std::string parameter;            // dotted path into the tree
    std::vector<std::string> values;  // raw tokens, applied verbatim
};

// Reads (and consumes) the sweep block; inactive when absent.
SweepSpec read_sweep_spec(const ConfigNode& root);

}  // namespace lrt

#endif
