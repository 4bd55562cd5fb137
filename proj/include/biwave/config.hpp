#pragma once

// Experiment configuration: one strict JSON document. Keys absent from the document
// keep the values of the selected preset ("preset": "example1" by default); unknown
// keys are rejected. Errors carry the line of the offending key.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "biwave/error.hpp"
#include "biwave/forward.hpp"
#include "biwave/grid.hpp"
#include "biwave/strength.hpp"

namespace biwave {

struct StrengthSpec {
    std::string kind = "example1";  // example1 | example2 | gaussian | constant | tabulated
    double amplitude = 4.0;
    double rate = 4.0;
    std::vector<double> center;  // empty: origin
    double value = 1.0;
    std::string path;
    bool clamp = true;
};

struct BoxSpec {
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t intervals = 0;  // 0: use the receiver default
};

struct InversionSpec {
    double gamma = 1e-7;
    std::size_t sweeps = 6;
    bool clamp = false;
    std::string data = "difference";  // difference | magnitude
};

struct ErgodicSpec {
    double band_start = 50.0;
    std::size_t nodes = 200;
    double m = 0.0;
    std::size_t path = 0;
    bool invert = false;
    double gamma = 1e-8;
    std::size_t sweeps = 50;
};

struct ExperimentConfig {
    std::string preset = "example1";
    int dim = 2;
    StrengthSpec strength;
    BoxSpec source;
    std::size_t receiver_intervals = 40;
    std::vector<BoxSpec> domains;
    std::vector<double> frequencies;
    std::size_t paths = 1000;
    std::uint64_t seed = 20240601;
    InversionSpec inversion;
    ErgodicSpec ergodic;
};

namespace config_detail {

/// Maps JSON pointers ("/inversion/gamma") to the 1-based line of their key or value.
/// Only positions are recorded; validity is checked by the real parser.
class LineIndex {
public:
    explicit LineIndex(const std::string& text) : s_(text) {
        skip_ws();
        value("");
    }

    [[nodiscard]] std::size_t line(const std::string& pointer) const {
        auto it = lines_.find(pointer);
        return it == lines_.end() ? 0 : it->second;
    }

private:
    void skip_ws() {
        while (i_ < s_.size() && (s_[i_] == ' ' || s_[i_] == '\t' || s_[i_] == '\r' || s_[i_] == '\n')) {
            if (s_[i_] == '\n') ++line_;
            ++i_;
        }
    }

    std::string string() {
        std::string out;
        ++i_;
        while (i_ < s_.size() && s_[i_] != '"') {
            if (s_[i_] == '\\' && i_ + 1 < s_.size()) ++i_;
            out += s_[i_++];
        }
        ++i_;
        return out;
    }

    void value(const std::string& ptr) {
        if (i_ >= s_.size()) return;
        if (!lines_.count(ptr)) lines_[ptr] = line_;
        const char c = s_[i_];
        if (c == '{') {
            ++i_;
            skip_ws();
            while (i_ < s_.size() && s_[i_] != '}') {
                if (s_[i_] != '"') return;
                const std::size_t key_line = line_;
                const std::string key = string();
                lines_[ptr + "/" + key] = key_line;
                skip_ws();
                if (i_ < s_.size() && s_[i_] == ':') ++i_;
                skip_ws();
                value(ptr + "/" + key);
                skip_ws();
                if (i_ < s_.size() && s_[i_] == ',') ++i_;
                skip_ws();
            }
            ++i_;
        } else if (c == '[') {
            ++i_;
            skip_ws();
            std::size_t n = 0;
            while (i_ < s_.size() && s_[i_] != ']') {
                value(ptr + "/" + std::to_string(n++));
                skip_ws();
                if (i_ < s_.size() && s_[i_] == ',') ++i_;
                skip_ws();
            }
            ++i_;
        } else if (c == '"') {
            string();
        } else {
            while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' && s_[i_] != '\n') ++i_;
        }
    }

    const std::string& s_;
    std::size_t i_ = 0;
    std::size_t line_ = 1;
    std::map<std::string, std::size_t> lines_;
};

class Reader {
public:
    Reader(std::string source, const LineIndex* index) : source_(std::move(source)), index_(index) {}

    [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const {
        std::ostringstream s;
        s << source_;
        if (index_ != nullptr) {
            if (const auto l = index_->line(pointer); l > 0) s << ':' << l;
        }
        s << ": " << (pointer.empty() ? "/" : pointer) << ": " << msg;
        throw ConfigError(s.str());
    }

    void only_keys(const nlohmann::json& j, const std::string& ptr, std::initializer_list<const char*> allowed) const {
        if (!j.is_object()) fail(ptr, "expected an object");
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, v] : j.items()) {
            if (!ok.count(key)) fail(ptr + "/" + key, "unknown key '" + key + "'");
        }
    }

    template <class T>
    void get(const nlohmann::json& j, const std::string& ptr, const char* key, T& out) const {
        if (!j.contains(key)) return;
        const auto& v = j.at(key);
        const std::string p = ptr + "/" + key;
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(p, "expected true or false");
            out = v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(p, "expected a string");
            out = v.get<std::string>();
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) fail(p, "expected a number");
            out = v.get<double>();
            if (!std::isfinite(out)) fail(p, "expected a finite number");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) fail(p, "expected an integer");
            if (v.is_number_unsigned()) {
                out = static_cast<T>(v.get<std::uint64_t>());
            } else {
                const auto s = v.get<std::int64_t>();
                if (s < 0 && std::is_unsigned_v<T>) fail(p, "expected a nonnegative integer");
                out = static_cast<T>(s);
            }
        } else {
            if (!v.is_array()) fail(p, "expected an array of numbers");
            out.clear();
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (!v[i].is_number()) fail(p + "/" + std::to_string(i), "expected a number");
                out.push_back(v[i].get<double>());
            }
        }
    }

    [[nodiscard]] const std::string& source() const { return source_; }

private:
    std::string source_;
    const LineIndex* index_;
};

inline std::vector<double> filled(int dim, double v) { return std::vector<double>(static_cast<std::size_t>(dim), v); }

}  // namespace config_detail

/// Paper defaults: D = [-1, 1]^2 on a 21 x 21 lattice, U1..U4 with 41 x 41 receivers, P = 1000.
inline ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    c.preset = name;
    c.source = {{-1.0, -1.0}, {1.0, 1.0}, 20};
    c.domains = {{{1.5, 1.5}, {2.5, 2.5}, 0},
                 {{1.5, -2.5}, {2.5, -1.5}, 0},
                 {{-2.5, -2.5}, {-1.5, -1.5}, 0},
                 {{-2.5, 1.5}, {-1.5, 2.5}, 0}};
    if (name == "example1") {
        c.frequencies = {2.0};
        c.inversion = {1e-7, 6, false, "difference"};
    } else if (name == "example2") {
        c.strength.kind = "example2";
        c.frequencies = {1.0, 2.0, 3.0, 4.0, 5.0};
        c.inversion = {1e-5, 6, false, "difference"};
    } else if (name == "ergodic3d") {
        c.dim = 3;
        c.source = {{-1.0, -1.0, -1.0}, {1.0, 1.0, 1.0}, 20};
        c.receiver_intervals = 1;
        // Five single-point test receivers, each a flat box.
        const std::vector<std::vector<double>> pts = {
            {2.0, 0.0, 0.0}, {0.0, 2.5, 0.0}, {0.0, 0.0, -3.0}, {1.8, 1.8, 1.8}, {-2.0, -1.0, 0.5}};
        c.domains.clear();
        for (const auto& p : pts) c.domains.push_back({p, p, 1});
        c.frequencies.clear();
        c.paths = 1;
        c.ergodic = {50.0, 200, 0.0, 0, false, 1e-8, 50};
    } else if (name == "ergodic2d") {
        c.frequencies.clear();
        c.paths = 1;
        c.ergodic = {50.0, 200, 0.0, 0, false, 1e-8, 50};
    } else {
        throw ConfigError("unknown preset '" + name + "' (example1, example2, ergodic2d, ergodic3d)");
    }
    return c;
}

/// Rejects inconsistent values; messages go through `rd` so they carry file and line.
inline void validate(const ExperimentConfig& c, const config_detail::Reader& rd) {
    if (c.dim != 2 && c.dim != 3) rd.fail("/dim", "must be 2 or 3");
    const auto d = static_cast<std::size_t>(c.dim);
    auto check_box = [&](const BoxSpec& b, const std::string& ptr, bool flat_ok) {
        if (b.lower.size() != d || b.upper.size() != d) rd.fail(ptr, "lower/upper need " + std::to_string(d) + " entries");
        for (std::size_t a = 0; a < d; ++a) {
            if (flat_ok ? !(b.upper[a] >= b.lower[a]) : !(b.upper[a] > b.lower[a])) {
                rd.fail(ptr + "/upper", "upper corner must exceed lower corner");
            }
        }
    };
    check_box(c.source, "/source", false);
    if (c.source.intervals < 1) rd.fail("/source/intervals", "must be >= 1");
    if (c.domains.empty()) rd.fail("/receivers/domains", "at least one measurement domain is required");
    if (c.receiver_intervals < 1) rd.fail("/receivers/intervals", "must be >= 1");
    for (std::size_t n = 0; n < c.domains.size(); ++n) {
        const std::string ptr = "/receivers/domains/" + std::to_string(n);
        check_box(c.domains[n], ptr, true);
        double gap2 = 0.0;
        for (std::size_t a = 0; a < d; ++a) {
            const double g = std::max({c.source.lower[a] - c.domains[n].upper[a], 0.0,
                                       c.domains[n].lower[a] - c.source.upper[a]});
            gap2 += g * g;
        }
        if (!(gap2 > 0.0)) rd.fail(ptr, "measurement domain must keep a positive distance from the source domain");
    }
    for (std::size_t f = 0; f < c.frequencies.size(); ++f) {
        const std::string ptr = "/frequencies/" + std::to_string(f);
        if (!(c.frequencies[f] > 0.0)) rd.fail(ptr, "frequencies must be positive");
        if (f > 0 && !(c.frequencies[f] > c.frequencies[f - 1])) rd.fail(ptr, "frequencies must be strictly increasing");
    }
    if (c.paths < 1) rd.fail("/paths", "must be >= 1");
    if (!(c.inversion.gamma >= 0.0)) rd.fail("/inversion/gamma", "must be >= 0");
    if (c.inversion.sweeps < 1) rd.fail("/inversion/sweeps", "must be >= 1");
    if (c.inversion.data != "difference" && c.inversion.data != "magnitude") {
        rd.fail("/inversion/data", "must be \"difference\" or \"magnitude\"");
    }
    if (!(c.ergodic.band_start > 0.0)) rd.fail("/ergodic/T", "must be > 0");
    if (c.ergodic.nodes < 2) rd.fail("/ergodic/nodes", "must be >= 2");
    if (!(c.ergodic.m > c.dim - 6.0 && c.ergodic.m <= c.dim)) rd.fail("/ergodic/m", "must lie in (d-6, d]");
    if (!(c.ergodic.gamma >= 0.0)) rd.fail("/ergodic/gamma", "must be >= 0");
    if (c.ergodic.sweeps < 1) rd.fail("/ergodic/sweeps", "must be >= 1");
    static const std::set<std::string> kinds = {"example1", "example2", "gaussian", "constant", "tabulated"};
    if (!kinds.count(c.strength.kind)) rd.fail("/strength/kind", "unknown strength kind '" + c.strength.kind + "'");
    if ((c.strength.kind == "example2" || c.strength.kind == "tabulated") && c.dim != 2) {
        rd.fail("/strength/kind", "'" + c.strength.kind + "' is two-dimensional");
    }
    if (!c.strength.center.empty() && c.strength.center.size() != d) rd.fail("/strength/center", "wrong dimension");
    if (c.strength.kind == "tabulated" && c.strength.path.empty()) rd.fail("/strength/path", "required for tabulated");
}

inline void validate(const ExperimentConfig& c) { validate(c, config_detail::Reader("config", nullptr)); }

/// Parses a config document; `source` names it in error messages.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "config") {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) line += text[i] == '\n';
        throw ConfigError(source + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
    }
    const config_detail::LineIndex index(text);
    const config_detail::Reader rd(source, &index);
    rd.only_keys(j, "", {"preset", "dim", "strength", "source", "receivers", "frequencies", "paths", "seed",
                         "inversion", "ergodic"});

    std::string preset = "example1";
    rd.get(j, "", "preset", preset);
    ExperimentConfig c;
    try {
        c = preset_config(preset);
    } catch (const ConfigError& e) {
        rd.fail("/preset", e.what());
    }
    rd.get(j, "", "dim", c.dim);
    if (j.contains("dim") && c.dim != preset_config(preset).dim) {
        // Changing dimension invalidates the preset geometry; require it to be restated.
        if (!j.contains("source") || !j.contains("receivers")) {
            rd.fail("/dim", "a dimension different from the preset needs explicit source and receivers");
        }
    }
    if (j.contains("strength")) {
        const auto& s = j["strength"];
        rd.only_keys(s, "/strength", {"kind", "amplitude", "rate", "center", "value", "path", "clamp"});
        rd.get(s, "/strength", "kind", c.strength.kind);
        rd.get(s, "/strength", "amplitude", c.strength.amplitude);
        rd.get(s, "/strength", "rate", c.strength.rate);
        rd.get(s, "/strength", "center", c.strength.center);
        rd.get(s, "/strength", "value", c.strength.value);
        rd.get(s, "/strength", "path", c.strength.path);
        rd.get(s, "/strength", "clamp", c.strength.clamp);
    }
    if (j.contains("source")) {
        const auto& s = j["source"];
        rd.only_keys(s, "/source", {"lower", "upper", "intervals"});
        rd.get(s, "/source", "lower", c.source.lower);
        rd.get(s, "/source", "upper", c.source.upper);
        rd.get(s, "/source", "intervals", c.source.intervals);
    }
    if (j.contains("receivers")) {
        const auto& r = j["receivers"];
        rd.only_keys(r, "/receivers", {"intervals", "domains"});
        rd.get(r, "/receivers", "intervals", c.receiver_intervals);
        if (r.contains("domains")) {
            if (!r["domains"].is_array()) rd.fail("/receivers/domains", "expected an array");
            c.domains.clear();
            for (std::size_t n = 0; n < r["domains"].size(); ++n) {
                const std::string ptr = "/receivers/domains/" + std::to_string(n);
                const auto& b = r["domains"][n];
                rd.only_keys(b, ptr, {"lower", "upper", "intervals"});
                BoxSpec box;
                rd.get(b, ptr, "lower", box.lower);
                rd.get(b, ptr, "upper", box.upper);
                rd.get(b, ptr, "intervals", box.intervals);
                c.domains.push_back(box);
            }
        }
    }
    rd.get(j, "", "frequencies", c.frequencies);
    rd.get(j, "", "paths", c.paths);
    rd.get(j, "", "seed", c.seed);
    if (j.contains("inversion")) {
        const auto& s = j["inversion"];
        rd.only_keys(s, "/inversion", {"gamma", "sweeps", "clamp", "data"});
        rd.get(s, "/inversion", "gamma", c.inversion.gamma);
        rd.get(s, "/inversion", "sweeps", c.inversion.sweeps);
        rd.get(s, "/inversion", "clamp", c.inversion.clamp);
        rd.get(s, "/inversion", "data", c.inversion.data);
    }
    if (j.contains("ergodic")) {
        const auto& s = j["ergodic"];
        rd.only_keys(s, "/ergodic", {"T", "nodes", "m", "path", "invert", "gamma", "sweeps"});
        rd.get(s, "/ergodic", "T", c.ergodic.band_start);
        rd.get(s, "/ergodic", "nodes", c.ergodic.nodes);
        rd.get(s, "/ergodic", "m", c.ergodic.m);
        rd.get(s, "/ergodic", "path", c.ergodic.path);
        rd.get(s, "/ergodic", "invert", c.ergodic.invert);
        rd.get(s, "/ergodic", "gamma", c.ergodic.gamma);
        rd.get(s, "/ergodic", "sweeps", c.ergodic.sweeps);
    }
    validate(c, rd);
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["preset"] = c.preset;
    j["dim"] = c.dim;
    j["strength"] = {{"kind", c.strength.kind}, {"amplitude", c.strength.amplitude}, {"rate", c.strength.rate},
                     {"center", c.strength.center}, {"value", c.strength.value}, {"path", c.strength.path},
                     {"clamp", c.strength.clamp}};
    j["source"] = {{"lower", c.source.lower}, {"upper", c.source.upper}, {"intervals", c.source.intervals}};
    nlohmann::json doms = nlohmann::json::array();
    for (const auto& b : c.domains) doms.push_back({{"lower", b.lower}, {"upper", b.upper}, {"intervals", b.intervals}});
    j["receivers"] = {{"intervals", c.receiver_intervals}, {"domains", doms}};
    j["frequencies"] = c.frequencies;
    j["paths"] = c.paths;
    j["seed"] = c.seed;
    j["inversion"] = {{"gamma", c.inversion.gamma}, {"sweeps", c.inversion.sweeps}, {"clamp", c.inversion.clamp},
                      {"data", c.inversion.data}};
    j["ergodic"] = {{"T", c.ergodic.band_start}, {"nodes", c.ergodic.nodes}, {"m", c.ergodic.m},
                    {"path", c.ergodic.path}, {"invert", c.ergodic.invert}, {"gamma", c.ergodic.gamma},
                    {"sweeps", c.ergodic.sweeps}};
    return j;
}

template <int Dim>
inline Point<Dim> to_point(const std::vector<double>& v) {
    if (v.size() != static_cast<std::size_t>(Dim)) throw ConfigError("point has the wrong dimension");
    Point<Dim> p{};
    for (int d = 0; d < Dim; ++d) p[d] = v[static_cast<std::size_t>(d)];
    return p;
}

template <int Dim>
inline Grid<Dim> make_source_grid(const ExperimentConfig& c) {
    return Grid<Dim>::covering(Box<Dim>{to_point<Dim>(c.source.lower), to_point<Dim>(c.source.upper)},
                               c.source.intervals);
}

/// Domain n gets label n + 1.
template <int Dim>
inline ReceiverSet<Dim> make_receivers(const ExperimentConfig& c) {
    ReceiverSet<Dim> rs;
    for (std::size_t n = 0; n < c.domains.size(); ++n) {
        const auto& b = c.domains[n];
        rs.add_lattice(Box<Dim>{to_point<Dim>(b.lower), to_point<Dim>(b.upper)},
                       b.intervals > 0 ? b.intervals : c.receiver_intervals, static_cast<int>(n) + 1);
    }
    return rs;
}

template <int Dim>
inline StrengthField<Dim> make_strength(const ExperimentConfig& c) {
    const Box<Dim> support{to_point<Dim>(c.source.lower), to_point<Dim>(c.source.upper)};
    const auto& s = c.strength;
    if (s.kind == "example1") return StrengthField<Dim>(GaussianBump<Dim>{}, support, s.clamp);
    if (s.kind == "gaussian") {
        GaussianBump<Dim> g{s.amplitude, s.rate, {}};
        if (!s.center.empty()) g.center = to_point<Dim>(s.center);
        return StrengthField<Dim>(g, support, s.clamp);
    }
    if (s.kind == "constant") return StrengthField<Dim>(ConstantStrength<Dim>{s.value}, support, s.clamp);
    if constexpr (Dim == 2) {
        if (s.kind == "example2") return StrengthField<2>(PeaksProfile{}, support, s.clamp);
        if (s.kind == "tabulated") {
            auto tab = load_tabulated_strength(s.path, s.clamp);
            return StrengthField<2>(tab.definition(), support, s.clamp);
        }
    }
    throw ConfigError("strength kind '" + s.kind + "' is not available in " + std::to_string(Dim) + "D");
}

}  // namespace biwave
