#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace sphere2b::cli {

using nlohmann::json;

// Violations of a command's config schema; reported with exit code 2.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Kind { Number, Integer, String, Bool, NumberList, Range, StringList, Sign };

struct Field {
    std::string key;
    Kind kind = Kind::Number;
    json def;            // null: optional with no default
    std::string help;
    std::size_t size = 0;  // NumberList: required length (0 = any)
};

using Schema = std::vector<Field>;

// Holds the raw flag strings of one subcommand until the merge.
struct Binding {
    Schema schema;
    std::string config_path;
    std::map<std::string, std::vector<std::string>> raw;
    std::map<std::string, bool> flags;
    std::map<std::string, CLI::Option*> options;
    bool print_schema = false;
};

std::string flag_name(const std::string& key);

// Adds --config, --schema and one option per field.
void bind(CLI::App& sub, Binding& b);

// Defaults, then the JSON file, then flags given on the command line. Values are validated and
// normalised (ranges become [a, b], signs become +1/-1).
json merge(const Binding& b);

json schema_json(const Schema& s);

// Common accessors on a merged config.
double num(const json& cfg, const std::string& key);
bool has(const json& cfg, const std::string& key);
std::vector<double> nums(const json& cfg, const std::string& key);

// "a:b:n" -> n values from a to b.
std::vector<double> parse_grid_axis(const std::string& spec, int& count);

}  // namespace sphere2b::cli
