#include "config.hpp"

#include <charconv>
#include <fstream>

namespace sphere2b::cli {

namespace {

double to_number(const std::string& key, std::string_view s) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw SchemaError(key + ": '" + std::string(s) + "' is not a number");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::Number: return "number";
        case Kind::Integer: return "integer";
        case Kind::String: return "string";
        case Kind::Bool: return "boolean";
        case Kind::NumberList: return "number list";
        case Kind::Range: return "range";
        case Kind::StringList: return "string list";
        case Kind::Sign: return "sign";
    }
    return "?";
}

json from_flag(const Field& f, const std::vector<std::string>& raw) {
    if (raw.empty()) throw SchemaError(f.key + ": missing value");
    const std::string& s = raw.front();
    switch (f.kind) {
        case Kind::Number: return to_number(f.key, s);
        case Kind::Integer: {
            long long v = 0;
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
                throw SchemaError(f.key + ": '" + s + "' is not an integer");
            return v;
        }
        case Kind::String: return s;
        case Kind::Bool: return true;
        case Kind::NumberList: {
            json a = json::array();
            for (const auto& part : split(s, ',')) a.push_back(to_number(f.key, part));
            return a;
        }
        case Kind::Range: return s;
        case Kind::StringList: return json(raw);
        case Kind::Sign: return s;
    }
    return nullptr;
}

json normalise(const Field& f, const json& v) {
    if (v.is_null()) return v;
    auto bad = [&] { return SchemaError(f.key + ": expected " + kind_name(f.kind) + ", got " + v.dump()); };
    switch (f.kind) {
        case Kind::Number:
            if (!v.is_number()) throw bad();
            return v.get<double>();
        case Kind::Integer:
            if (!v.is_number_integer()) throw bad();
            return v;
        case Kind::String:
            if (!v.is_string()) throw bad();
            return v;
        case Kind::Bool:
            if (!v.is_boolean()) throw bad();
            return v;
        case Kind::NumberList: {
            if (!v.is_array()) throw bad();
            for (const auto& x : v)
                if (!x.is_number()) throw bad();
            if (f.size && v.size() != f.size)
                throw SchemaError(f.key + ": expected " + std::to_string(f.size) + " values, got " +
                                  std::to_string(v.size()));
            return v;
        }
        case Kind::Range: {
            json a;
            if (v.is_string()) {
                const auto parts = split(v.get<std::string>(), ':');
                if (parts.size() != 2) throw SchemaError(f.key + ": range must look like a:b");
                a = json::array({to_number(f.key, parts[0]), to_number(f.key, parts[1])});
            } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
                a = v;
            } else {
                throw bad();
            }
            if (!(a[1].get<double>() > a[0].get<double>())) throw SchemaError(f.key + ": range end must exceed start");
            return a;
        }
        case Kind::StringList: {
            if (!v.is_array()) throw bad();
            for (const auto& x : v)
                if (!x.is_string()) throw bad();
            return v;
        }
        case Kind::Sign: {
            if (v.is_number_integer() && (v.get<int>() == 1 || v.get<int>() == -1)) return v;
            if (v.is_string()) {
                const auto s = v.get<std::string>();
                if (s == "+" || s == "1" || s == "+1") return 1;
                if (s == "-" || s == "-1") return -1;
            }
            throw SchemaError(f.key + ": sign must be + or -");
        }
    }
    return v;
}

}  // namespace

std::string flag_name(const std::string& key) {
    std::string s = "--" + key;
    for (char& c : s)
        if (c == '_') c = '-';
    return s;
}

void bind(CLI::App& sub, Binding& b) {
    sub.add_option("--config", b.config_path, "JSON config file; flags override its values");
    sub.add_flag("--schema", b.print_schema, "Print the config schema of this command and exit");
    for (const Field& f : b.schema) {
        const std::string name = flag_name(f.key);
        std::string help = f.help;
        if (!f.def.is_null()) help += " (default " + f.def.dump() + ")";
        if (f.kind == Kind::Bool) {
            b.flags[f.key] = false;
            b.options[f.key] = sub.add_flag(name, b.flags[f.key], help);
        } else if (f.kind == Kind::StringList) {
            b.options[f.key] = sub.add_option(name, b.raw[f.key], help)->expected(1, -1);
        } else {
            // Values such as "-1" or "-2:8" must not be taken for flags.
            b.options[f.key] = sub.add_option(name, b.raw[f.key], help)->expected(1)->allow_extra_args(false);
        }
    }
}

json merge(const Binding& b) {
    json cfg = json::object();
    for (const Field& f : b.schema) cfg[f.key] = f.def;
    if (!b.config_path.empty()) {
        std::ifstream in(b.config_path);
        if (!in) throw SchemaError("cannot read config file " + b.config_path);
        json file;
        try {
            file = json::parse(in);
        } catch (const json::parse_error& e) {
            throw SchemaError("config file " + b.config_path + " is not valid JSON: " + e.what());
        }
        if (!file.is_object()) throw SchemaError("config file must hold a JSON object");
        for (auto it = file.begin(); it != file.end(); ++it) {
            if (!cfg.contains(it.key())) throw SchemaError("unknown config key '" + it.key() + "'");
            cfg[it.key()] = it.value();
        }
    }
    for (const Field& f : b.schema) {
        const auto opt = b.options.find(f.key);
        if (opt != b.options.end() && opt->second->count() > 0) {
            if (f.kind == Kind::Bool)
                cfg[f.key] = true;
            else
                cfg[f.key] = from_flag(f, b.raw.at(f.key));
        }
        cfg[f.key] = normalise(f, cfg[f.key]);
    }
    return cfg;
}

json schema_json(const Schema& s) {
    json out = json::object();
    for (const Field& f : s) {
        json e = {{"type", kind_name(f.kind)}, {"flag", flag_name(f.key)}, {"help", f.help}};
        if (!f.def.is_null()) e["default"] = f.def;
        if (f.size) e["length"] = f.size;
        out[f.key] = e;
    }
    return out;
}

double num(const json& cfg, const std::string& key) {
    if (!has(cfg, key)) throw SchemaError("missing required value '" + key + "'");
    return cfg.at(key).get<double>();
}

bool has(const json& cfg, const std::string& key) { return cfg.contains(key) && !cfg.at(key).is_null(); }

std::vector<double> nums(const json& cfg, const std::string& key) {
    if (!has(cfg, key)) throw SchemaError("missing required value '" + key + "'");
    return cfg.at(key).get<std::vector<double>>();
}

std::vector<double> parse_grid_axis(const std::string& spec, int& count) {
    const auto parts = split(spec, ':');
    if (parts.size() != 3) throw SchemaError("grid axis must look like a:b:n, got '" + spec + "'");
    const double a = to_number("grid", parts[0]), b = to_number("grid", parts[1]);
    long long n = 0;
    const auto res = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), n);
    if (res.ec != std::errc{} || n < 1 || n > 100000) throw SchemaError("grid axis count must be in [1, 100000]");
    count = static_cast<int>(n);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

}  // namespace sphere2b::cli
