#include "varigeo/problemfile.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <variant>

namespace varigeo::problemfile {

namespace {

using Value = std::variant<std::string, double, bool, std::vector<std::string>>;

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// strips comments outside quotes
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

Value parse_value(const std::string& raw, int lineno) {
    std::string v = trim(raw);
    if (v.empty()) throw FileError("empty value on line " + std::to_string(lineno));
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw FileError("unterminated string on line " + std::to_string(lineno));
        return v.substr(1, v.size() - 2);
    }
    if (v.front() == '[') {
        if (v.back() != ']')
            throw FileError("unterminated array on line " + std::to_string(lineno));
        std::vector<std::string> items;
        std::string body = v.substr(1, v.size() - 2);
        std::size_t i = 0;
        while (i < body.size()) {
            while (i < body.size() && (std::isspace(static_cast<unsigned char>(body[i])) || body[i] == ','))
                ++i;
            if (i >= body.size()) break;
            if (body[i] != '"')
                throw FileError("array items must be quoted strings (line " +
                                std::to_string(lineno) + ")");
            std::size_t end = body.find('"', i + 1);
            if (end == std::string::npos)
                throw FileError("unterminated string on line " + std::to_string(lineno));
            items.push_back(body.substr(i + 1, end - i - 1));
            i = end + 1;
        }
        return items;
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (...) {
    }
    throw FileError("cannot parse value '" + v + "' on line " + std::to_string(lineno));
}

using Table = std::map<std::string, std::map<std::string, Value>>;

Table parse_toml(const std::string& text) {
    Table out;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw FileError("malformed section header on line " +
                                std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            out[section];
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FileError("expected key = value on line " + std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        if (key.empty() || section.empty())
            throw FileError("key outside a section on line " + std::to_string(lineno));
        out[section][key] = parse_value(line.substr(eq + 1), lineno);
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

excalc::Role role_from(const std::string& name) {
    if (name == "time") return excalc::Role::Time;
    if (name == "position") return excalc::Role::Position;
    if (name == "velocity") return excalc::Role::Velocity;
    if (name == "action") return excalc::Role::Action;
    if (name == "auxiliary") return excalc::Role::Auxiliary;
    if (name == "momentum") return excalc::Role::Momentum;
    if (name == "action-momentum") return excalc::Role::ActionMomentum;
    throw FileError("unknown coordinate role '" + name + "'");
}

template <typename T>
std::optional<T> get(const Table& t, const std::string& sec,
                     const std::string& key) {
    auto s = t.find(sec);
    if (s == t.end()) return std::nullopt;
    auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    if (!std::holds_alternative<T>(k->second))
        throw FileError("unexpected value type for " + sec + "." + key);
    return std::get<T>(k->second);
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
    Table t = parse_toml(text);
    ProblemFile p;

    auto coords = get<std::string>(t, "chart", "coords");
    if (!coords) throw FileError("chart.coords is required");
    std::vector<excalc::Coord> cs;
    for (auto& item : split(*coords, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos)
            throw FileError("chart coordinate '" + item + "' needs a role");
        cs.push_back({trim(item.substr(0, colon)),
                      role_from(trim(item.substr(colon + 1)))});
    }
    std::vector<std::string> params;
    if (auto ps = get<std::string>(t, "chart", "params"))
        params = split(*ps, ',');
    p.chart = excalc::Chart(cs, params);

    if (auto sec = t.find("params"); sec != t.end())
        for (auto& [k, v] : sec->second) {
            if (!std::holds_alternative<double>(v))
                throw FileError("params." + k + " must be numeric");
            p.params[k] = std::get<double>(v);
        }

    p.lagrangian = get<std::string>(t, "model", "lagrangian");
    p.hamiltonian = get<std::string>(t, "model", "hamiltonian");
    if (auto fns = get<std::vector<std::string>>(t, "model", "functions"))
        p.functions = *fns;
    if (auto i0 = get<std::vector<std::string>>(t, "constraints", "I0"))
        p.I0 = *i0;
    if (auto nh = get<std::vector<std::string>>(t, "constraints", "I1nh"))
        p.I1nh = *nh;
    if (auto st = get<std::string>(t, "pipeline", "stage")) p.stage = *st;

    if (auto sec = t.find("gauge"); sec != t.end())
        for (auto& [k, v] : sec->second) {
            if (!std::holds_alternative<std::string>(v))
                throw FileError("gauge." + k + " must be an expression string");
            p.gauge[k] = std::get<std::string>(v);
        }
    if (auto sec = t.find("monitors"); sec != t.end())
        for (auto& [k, v] : sec->second) {
            if (!std::holds_alternative<std::string>(v))
                throw FileError("monitors." + k + " must be a string");
            p.monitors[k] = std::get<std::string>(v);
        }

    if (auto x0 = get<std::string>(t, "integrate", "x0")) {
        std::map<std::string, double> point;
        for (auto& item : split(*x0, ',')) {
            auto eq = item.find('=');
            if (eq == std::string::npos)
                throw FileError("x0 entry '" + item + "' needs coord=value");
            point[trim(item.substr(0, eq))] =
                std::stod(trim(item.substr(eq + 1)));
        }
        p.x0 = point;
    }
    if (auto sp = get<double>(t, "integrate", "span")) p.span = *sp;
    if (auto st = get<double>(t, "integrate", "step")) p.step = *st;

    if (auto vm = get<std::string>(t, "verify", "mode")) p.verify_mode = *vm;
    if (auto c = get<bool>(t, "verify", "corrupt")) p.corrupt = *c;
    return p;
}

ProblemFile load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str());
}

}  // namespace varigeo::problemfile
