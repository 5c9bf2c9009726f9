#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <variant>
#include <vector>

#include "opiniond/dynamics.hpp"
#include "opiniond/experiments.hpp"

namespace opiniond {

/// Parse failure with the offending position. Semantic failures (bad
/// ranges, unknown keys) carry the position of the key that caused them.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::size_t line, std::size_t col, const std::string& message)
        : std::runtime_error("config: line " + std::to_string(line) + ", col " +
                             std::to_string(col) + ": " + message),
          line_(line),
          col_(col) {}

    std::size_t line() const { return line_; }
    std::size_t col() const { return col_; }

private:
    std::size_t line_;
    std::size_t col_;
};

/// A fully validated run description: model parameters plus run length,
/// snapshot schedule, seed, output location and execution knobs.
struct RunConfig {
    ModelParams params;
    std::uint64_t total_steps = 0;
    std::vector<std::uint64_t> snapshot_schedule;
    std::uint64_t seed = 1;
    std::string output_dir;
    std::uint32_t rewire_probe_limit = 50;
    MutationTarget mutation_target = MutationTarget::Independent;
    std::size_t histogram_bins = 20;

    StepOptions step_options() const {
        return StepOptions{rewire_probe_limit, mutation_target};
    }

    bool operator==(const RunConfig& o) const {
        const ModelParams& a = params;
        const ModelParams& b = o.params;
        return a.n == b.n && a.k_avg == b.k_avg && a.d == b.d && a.mu == b.mu &&
               a.w == b.w && a.p == b.p && a.initial == b.initial &&
               a.basal == b.basal && total_steps == o.total_steps &&
               snapshot_schedule == o.snapshot_schedule && seed == o.seed &&
               output_dir == o.output_dir &&
               rewire_probe_limit == o.rewire_probe_limit &&
               mutation_target == o.mutation_target &&
               histogram_bins == o.histogram_bins;
    }
};

namespace cfg_detail {

struct Value;
using Table = std::vector<std::pair<std::string, Value>>;

struct Value {
    std::variant<std::int64_t, double, bool, std::string, std::vector<Value>, Table>
        data;
    std::size_t line = 0;
    std::size_t col = 0;
};

/// Cursor over the config text with line/column tracking.
class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Table parse_document() {
        Table table;
        skip_blank();
        while (!eof()) {
            auto [key, line, col] = parse_key();
            skip_spaces();
            expect('=');
            skip_spaces();
            Value value = parse_value();
            value.line = line;
            value.col = col;
            for (const auto& [existing, _] : table) {
                if (existing == key) {
                    throw ConfigError(line, col, "duplicate key '" + key + "'");
                }
            }
            table.emplace_back(key, std::move(value));
            skip_spaces();
            if (!eof() && peek() == '#') {
                skip_to_eol();
            }
            if (!eof() && peek() != '\n') {
                fail("expected end of line after value");
            }
            skip_blank();
        }
        return table;
    }

private:
    bool eof() const { return pos_ >= text_.size(); }

    char peek() const { return text_[pos_]; }

    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw ConfigError(line_, col_, message);
    }

    void expect(char c) {
        if (eof() || peek() != c) {
            fail(std::string("expected '") + c + "'");
        }
        advance();
    }

    void skip_spaces() {
        while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) {
            advance();
        }
    }

    void skip_to_eol() {
        while (!eof() && peek() != '\n') {
            advance();
        }
    }

    /// Whitespace, newlines and comment lines between entries.
    void skip_blank() {
        for (;;) {
            skip_spaces();
            if (eof()) {
                return;
            }
            if (peek() == '#') {
                skip_to_eol();
            } else if (peek() == '\n') {
                advance();
            } else {
                return;
            }
        }
    }

    static bool is_key_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }

    std::tuple<std::string, std::size_t, std::size_t> parse_key() {
        std::size_t line = line_;
        std::size_t col = col_;
        std::string key;
        while (!eof() && is_key_char(peek())) {
            key.push_back(peek());
            advance();
        }
        if (key.empty()) {
            fail("expected a key");
        }
        return {key, line, col};
    }

    Value parse_value() {
        if (eof()) {
            fail("expected a value");
        }
        std::size_t line = line_;
        std::size_t col = col_;
        Value value;
        char c = peek();
        if (c == '"') {
            value.data = parse_string();
        } else if (c == '[') {
            value.data = parse_array();
        } else if (c == '{') {
            value.data = parse_inline_table();
        } else if (is_key_char(c) || c == '+' || c == '-' || c == '.') {
            value.data = parse_scalar();
        } else {
            fail("unexpected character in value");
        }
        value.line = line;
        value.col = col;
        return value;
    }

    std::string parse_string() {
        expect('"');
        std::string out;
        while (!eof() && peek() != '"') {
            if (peek() == '\n') {
                fail("unterminated string");
            }
            out.push_back(peek());
            advance();
        }
        expect('"');
        return out;
    }

    std::vector<Value> parse_array() {
        expect('[');
        std::vector<Value> items;
        skip_blank();
        if (!eof() && peek() == ']') {
            advance();
            return items;
        }
        for (;;) {
            skip_blank();
            items.push_back(parse_value());
            skip_blank();
            if (eof()) {
                fail("unterminated array");
            }
            if (peek() == ',') {
                advance();
                continue;
            }
            if (peek() == ']') {
                advance();
                return items;
            }
            fail("expected ',' or ']' in array");
        }
    }

    Table parse_inline_table() {
        expect('{');
        Table table;
        skip_spaces();
        if (!eof() && peek() == '}') {
            advance();
            return table;
        }
        for (;;) {
            skip_spaces();
            auto [key, line, col] = parse_key();
            skip_spaces();
            expect('=');
            skip_spaces();
            Value value = parse_value();
            value.line = line;
            value.col = col;
            for (const auto& [existing, _] : table) {
                if (existing == key) {
                    throw ConfigError(line, col, "duplicate key '" + key + "'");
                }
            }
            table.emplace_back(key, std::move(value));
            skip_spaces();
            if (eof()) {
                fail("unterminated inline table");
            }
            if (peek() == ',') {
                advance();
                continue;
            }
            if (peek() == '}') {
                advance();
                return table;
            }
            fail("expected ',' or '}' in inline table");
        }
    }

    /// Bare scalar: bool, integer or float. Underscore separators are
    /// allowed inside numbers (1_000_000).
    std::variant<std::int64_t, double, bool, std::string, std::vector<Value>, Table>
    parse_scalar() {
        std::string raw;
        while (!eof() && (is_key_char(peek()) || peek() == '+' || peek() == '.')) {
            raw.push_back(peek());
            advance();
        }
        if (raw == "true") {
            return true;
        }
        if (raw == "false") {
            return false;
        }
        std::string digits;
        bool is_float = false;
        for (char c : raw) {
            if (c == '_') {
                continue;
            }
            if (c == '.' || c == 'e' || c == 'E') {
                is_float = true;
            }
            digits.push_back(c);
        }
        if (digits.empty()) {
            fail("expected a value");
        }
        if (!is_float) {
            std::int64_t iv = 0;
            auto [ptr, ec] =
                std::from_chars(digits.data(), digits.data() + digits.size(), iv);
            if (ec == std::errc() && ptr == digits.data() + digits.size()) {
                return iv;
            }
        }
        double dv = 0.0;
        auto [ptr, ec] =
            std::from_chars(digits.data(), digits.data() + digits.size(), dv);
        if (ec != std::errc() || ptr != digits.data() + digits.size()) {
            fail("malformed number '" + raw + "'");
        }
        return dv;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t col_ = 1;
};

[[noreturn]] inline void semantic_error(const Value& value, const std::string& message) {
    throw ConfigError(value.line, value.col, message);
}

inline double as_number(const Value& value, const std::string& key) {
    if (std::holds_alternative<std::int64_t>(value.data)) {
        return static_cast<double>(std::get<std::int64_t>(value.data));
    }
    if (std::holds_alternative<double>(value.data)) {
        return std::get<double>(value.data);
    }
    semantic_error(value, key + " must be a number");
}

inline std::int64_t as_integer(const Value& value, const std::string& key) {
    if (!std::holds_alternative<std::int64_t>(value.data)) {
        semantic_error(value, key + " must be an integer");
    }
    return std::get<std::int64_t>(value.data);
}

inline std::uint64_t as_unsigned(const Value& value, const std::string& key) {
    std::int64_t v = as_integer(value, key);
    if (v < 0) {
        semantic_error(value, key + " must be non-negative");
    }
    return static_cast<std::uint64_t>(v);
}

inline std::string as_string(const Value& value, const std::string& key) {
    if (!std::holds_alternative<std::string>(value.data)) {
        semantic_error(value, key + " must be a string");
    }
    return std::get<std::string>(value.data);
}

inline DistributionSpec parse_distribution(const Value& value, const std::string& key) {
    if (!std::holds_alternative<Table>(value.data)) {
        semantic_error(value, key + " must be a table like { kind = \"uniform\" }");
    }
    const Table& table = std::get<Table>(value.data);
    std::optional<std::string> kind;
    std::optional<double> gamma;
    std::optional<double> x_min;
    for (const auto& [k, v] : table) {
        if (k == "kind") {
            kind = as_string(v, key + ".kind");
        } else if (k == "gamma") {
            gamma = as_number(v, key + ".gamma");
        } else if (k == "x_min") {
            x_min = as_number(v, key + ".x_min");
        } else {
            semantic_error(v, "unknown key '" + key + "." + k + "'");
        }
    }
    if (!kind) {
        semantic_error(value, key + ".kind is required");
    }
    if (*kind == "uniform") {
        if (gamma || x_min) {
            semantic_error(value,
                           key + ": gamma/x_min are only valid for kind = \"powerlaw\"");
        }
        return DistributionSpec::uniform();
    }
    if (*kind == "powerlaw") {
        DistributionSpec spec =
            DistributionSpec::power_law(gamma.value_or(3.0), x_min.value_or(0.01));
        if (!(spec.gamma > 1.0)) {
            semantic_error(value, key + ".gamma must be > 1");
        }
        if (!(spec.x_min > 0.0 && spec.x_min < 1.0)) {
            semantic_error(value, key + ".x_min must be in (0,1)");
        }
        return spec;
    }
    semantic_error(value, key + ".kind must be \"uniform\" or \"powerlaw\"");
}

}  // namespace cfg_detail

/// Parses and validates a run configuration. The format is a key = value
/// document (a TOML subset: scalars, arrays, inline tables, # comments).
/// Unknown keys are errors, so typos cannot silently fall back to defaults.
inline RunConfig parse_config(std::string_view text) {
    using namespace cfg_detail;
    Parser parser(text);
    Table table = parser.parse_document();

    RunConfig config;
    bool have_n = false, have_k = false, have_d = false, have_w = false,
         have_p = false, have_steps = false, have_schedule = false;

    for (const auto& [key, value] : table) {
        if (key == "n") {
            std::int64_t v = as_integer(value, "n");
            if (v < 2) {
                semantic_error(value, "n must be >= 2");
            }
            config.params.n = static_cast<std::size_t>(v);
            have_n = true;
        } else if (key == "k_avg") {
            config.params.k_avg = as_number(value, "k_avg");
            have_k = true;
        } else if (key == "d") {
            double v = as_number(value, "d");
            if (!(v > 0.0 && v <= 1.0)) {
                semantic_error(value, "d must be in (0,1]");
            }
            config.params.d = v;
            have_d = true;
        } else if (key == "mu") {
            double v = as_number(value, "mu");
            if (!(v > 0.0 && v <= 0.5)) {
                semantic_error(value, "mu must be in (0,0.5]");
            }
            config.params.mu = v;
        } else if (key == "w") {
            double v = as_number(value, "w");
            if (!(v >= 0.0 && v <= 1.0)) {
                semantic_error(value, "w must be in [0,1]");
            }
            config.params.w = v;
            have_w = true;
        } else if (key == "p") {
            double v = as_number(value, "p");
            if (!(v >= 0.0 && v <= 1.0)) {
                semantic_error(value, "p must be in [0,1]");
            }
            config.params.p = v;
            have_p = true;
        } else if (key == "total_steps") {
            config.total_steps = as_unsigned(value, "total_steps");
            have_steps = true;
        } else if (key == "snapshot_schedule") {
            if (!std::holds_alternative<std::vector<Value>>(value.data)) {
                semantic_error(value, "snapshot_schedule must be an array of integers");
            }
            config.snapshot_schedule.clear();
            for (const Value& item : std::get<std::vector<Value>>(value.data)) {
                config.snapshot_schedule.push_back(
                    as_unsigned(item, "snapshot_schedule element"));
            }
            have_schedule = true;
        } else if (key == "seed") {
            config.seed = as_unsigned(value, "seed");
        } else if (key == "output_dir") {
            config.output_dir = as_string(value, "output_dir");
        } else if (key == "rewire_probe_limit") {
            config.rewire_probe_limit =
                static_cast<std::uint32_t>(as_unsigned(value, "rewire_probe_limit"));
        } else if (key == "mutation_target") {
            std::string v = as_string(value, "mutation_target");
            if (v == "independent") {
                config.mutation_target = MutationTarget::Independent;
            } else if (v == "interacting") {
                config.mutation_target = MutationTarget::Interacting;
            } else {
                semantic_error(value,
                               "mutation_target must be \"independent\" or \"interacting\"");
            }
        } else if (key == "histogram_bins") {
            std::int64_t v = as_integer(value, "histogram_bins");
            if (v < 2) {
                semantic_error(value, "histogram_bins must be >= 2");
            }
            config.histogram_bins = static_cast<std::size_t>(v);
        } else if (key == "initial") {
            config.params.initial = parse_distribution(value, "initial");
        } else if (key == "basal") {
            config.params.basal = parse_distribution(value, "basal");
        } else {
            semantic_error(value, "unknown key '" + key + "'");
        }
    }

    auto require = [&](bool have, const char* name) {
        if (!have) {
            throw ConfigError(1, 1, std::string("missing required key '") + name + "'");
        }
    };
    require(have_n, "n");
    require(have_k, "k_avg");
    require(have_d, "d");
    require(have_w, "w");
    require(have_p, "p");
    require(have_steps, "total_steps");

    if (config.params.k_avg < 0.0 ||
        config.params.k_avg > static_cast<double>(config.params.n - 1)) {
        throw ConfigError(1, 1, "k_avg must be in [0, n-1]");
    }
    if (!have_schedule) {
        config.snapshot_schedule = {0, config.total_steps};
        if (config.total_steps == 0) {
            config.snapshot_schedule = {0};
        }
    }
    const auto& schedule = config.snapshot_schedule;
    bool schedule_ok = !schedule.empty() && schedule.front() == 0;
    for (std::size_t i = 1; schedule_ok && i < schedule.size(); ++i) {
        schedule_ok = schedule[i - 1] < schedule[i];
    }
    if (schedule_ok && schedule.back() > config.total_steps) {
        schedule_ok = false;
    }
    if (!schedule_ok) {
        throw ConfigError(
            1, 1,
            "snapshot_schedule must be strictly increasing, start at 0 and stay "
            "within total_steps");
    }
    config.params.validate();
    return config;
}

namespace cfg_detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format_distribution(const DistributionSpec& spec) {
    if (spec.kind == DistributionKind::Uniform) {
        return "{ kind = \"uniform\" }";
    }
    return "{ kind = \"powerlaw\", gamma = " + format_double(spec.gamma) +
           ", x_min = " + format_double(spec.x_min) + " }";
}

}  // namespace cfg_detail

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const RunConfig& config) {
    using cfg_detail::format_double;
    std::ostringstream os;
    os << "n = " << config.params.n << "\n";
    os << "k_avg = " << format_double(config.params.k_avg) << "\n";
    os << "d = " << format_double(config.params.d) << "\n";
    os << "mu = " << format_double(config.params.mu) << "\n";
    os << "w = " << format_double(config.params.w) << "\n";
    os << "p = " << format_double(config.params.p) << "\n";
    os << "initial = " << cfg_detail::format_distribution(config.params.initial)
       << "\n";
    os << "basal = " << cfg_detail::format_distribution(config.params.basal) << "\n";
    os << "total_steps = " << config.total_steps << "\n";
    os << "snapshot_schedule = [";
    for (std::size_t i = 0; i < config.snapshot_schedule.size(); ++i) {
        os << (i ? ", " : "") << config.snapshot_schedule[i];
    }
    os << "]\n";
    os << "seed = " << config.seed << "\n";
    if (!config.output_dir.empty()) {
        os << "output_dir = \"" << config.output_dir << "\"\n";
    }
    os << "rewire_probe_limit = " << config.rewire_probe_limit << "\n";
    os << "mutation_target = \""
       << (config.mutation_target == MutationTarget::Independent ? "independent"
                                                                 : "interacting")
       << "\"\n";
    os << "histogram_bins = " << config.histogram_bins << "\n";
    return os.str();
}

/// RunConfig for one seed of a scenario (used by the preset-driven CLI).
inline RunConfig run_config_from_scenario(const Scenario& scenario,
                                          std::uint64_t seed) {
    RunConfig config;
    config.params = scenario.params;
    config.total_steps = scenario.total_steps;
    config.snapshot_schedule = scenario.snapshot_schedule;
    config.seed = seed;
    return config;
}

}  // namespace opiniond
