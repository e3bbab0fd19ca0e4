#include "relayrisk/case_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "relayrisk/errors.hpp"

namespace relayrisk {
namespace {

using nlohmann::json;

struct MatrixRow {
    int line = 0;
    std::vector<double> values;
};

struct RawCase {
    std::string name;
    std::optional<double> base_mva;
    std::map<std::string, std::vector<MatrixRow>> matrices;
};

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view token, int line)
{
    if (token == "Inf" || token == "inf" || token == "+Inf")
        return std::numeric_limits<double>::infinity();
    if (token == "-Inf" || token == "-inf")
        return -std::numeric_limits<double>::infinity();
    if (!token.empty() && token.front() == '+')
        token.remove_prefix(1);
    double value = 0.0;
    const auto* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw ParseError(line, "invalid number '" + std::string(token) + "'");
    return value;
}

// Splits matrix text into rows. Rows end at ';' or a newline; ']' closes the
// matrix. Returns true once the closing bracket has been seen.
bool consume_matrix_text(std::string_view text, int line, std::vector<MatrixRow>& rows,
                         std::vector<double>& pending)
{
    auto flush = [&] {
        if (!pending.empty()) {
            rows.push_back({line, std::move(pending)});
            pending.clear();
        }
    };
    std::size_t pos = 0;
    while (pos < text.size()) {
        const char c = text[pos];
        if (c == ' ' || c == '\t' || c == ',' || c == '\r') {
            ++pos;
        } else if (c == ';') {
            flush();
            ++pos;
        } else if (c == ']') {
            flush();
            const auto rest = trim(text.substr(pos + 1));
            if (!rest.empty() && rest != ";")
                throw ParseError(line, "unexpected text after ']'");
            return true;
        } else {
            auto end = text.find_first_of(" \t,;]\r", pos);
            if (end == std::string_view::npos)
                end = text.size();
            pending.push_back(parse_number(text.substr(pos, end - pos), line));
            pos = end;
        }
    }
    flush();
    return false;
}

RawCase lex_matpower(std::string_view text)
{
    RawCase raw;
    std::string current;  // matrix being read, empty when outside one
    int matrix_line = 0;
    std::vector<double> pending;

    std::vector<std::string_view> lines;
    for (std::size_t start = 0; start <= text.size();) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }

    for (std::size_t n = 0; n < lines.size(); ++n) {
        const int line_no = static_cast<int>(n) + 1;
        std::string_view line = lines[n];
        if (auto pct = line.find('%'); pct != std::string_view::npos)
            line = line.substr(0, pct);
        line = trim(line);

        if (!current.empty()) {
            if (consume_matrix_text(line, line_no, raw.matrices[current], pending))
                current.clear();
            continue;
        }
        if (line.empty())
            continue;

        if (line.starts_with("function")) {
            auto eq = line.find('=');
            if (eq != std::string_view::npos)
                raw.name = std::string(trim(line.substr(eq + 1)));
            continue;
        }
        if (!line.starts_with("mpc."))
            throw ParseError(line_no, "unexpected text '" + std::string(line) + "'");
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParseError(line_no, "expected '=' after field name");
        const std::string field(trim(line.substr(4, eq - 4)));
        std::string_view rhs = trim(line.substr(eq + 1));
        if (field.empty())
            throw ParseError(line_no, "empty field name");

        if (rhs.starts_with("[")) {
            current = field;
            matrix_line = line_no;
            if (consume_matrix_text(rhs.substr(1), line_no, raw.matrices[current], pending))
                current.clear();
        } else if (field == "baseMVA") {
            if (rhs.ends_with(";"))
                rhs = trim(rhs.substr(0, rhs.size() - 1));
            raw.base_mva = parse_number(rhs, line_no);
        }
        // Other scalar fields (version, ...) carry nothing we model.
    }
    if (!current.empty())
        throw ParseError(matrix_line, "matrix 'mpc." + current + "' is not closed");
    return raw;
}

int as_int(double v, int line, const char* what)
{
    if (!std::isfinite(v) || v != std::floor(v))
        throw ParseError(line, std::string(what) + " must be an integer");
    return static_cast<int>(v);
}

void require_columns(const MatrixRow& row, std::size_t n, const char* section)
{
    if (row.values.size() < n)
        throw ParseError(row.line, std::string(section) + " row needs at least " + std::to_string(n) +
                                       " columns, found " + std::to_string(row.values.size()));
}

Network build_from_matpower(const RawCase& raw)
{
    Network net;
    net.name = raw.name;
    net.base_mva = raw.base_mva.value_or(100.0);

    auto rows_of = [&](const char* name) -> const std::vector<MatrixRow>& {
        static const std::vector<MatrixRow> empty;
        auto it = raw.matrices.find(name);
        return it == raw.matrices.end() ? empty : it->second;
    };

    for (const auto& row : rows_of("bus")) {
        require_columns(row, 13, "bus");
        const auto& v = row.values;
        Bus bus;
        bus.id = as_int(v[0], row.line, "bus id");
        switch (as_int(v[1], row.line, "bus type")) {
        case 1: bus.kind = BusKind::PQ; break;
        case 2: bus.kind = BusKind::PV; break;
        case 3: bus.kind = BusKind::Slack; break;
        case 4: throw ValidationError("bus " + std::to_string(bus.id) + ": isolated bus type is not supported");
        default: throw ValidationError("bus " + std::to_string(bus.id) + ": unknown bus type");
        }
        bus.load_p = v[2];
        bus.load_q = v[3];
        bus.shunt_g = v[4];
        bus.shunt_b = v[5];
        bus.voltage_setpoint = v[7];
        net.buses.push_back(bus);
    }
    net.reindex();

    std::vector<bool> setpoint_taken(net.buses.size(), false);
    int gen_id = 0;
    for (const auto& row : rows_of("gen")) {
        require_columns(row, 10, "gen");
        const auto& v = row.values;
        Generator gen;
        gen.id = ++gen_id;
        gen.bus = as_int(v[0], row.line, "generator bus");
        gen.p_out = v[1];
        gen.q_out = v[2];
        gen.q_max = v[3];
        gen.q_min = v[4];
        gen.in_service = v[7] > 0.0;
        if (auto idx = net.find_bus(gen.bus); idx && gen.in_service && !setpoint_taken[*idx] &&
                                              net.buses[*idx].kind != BusKind::PQ) {
            net.buses[*idx].voltage_setpoint = v[5];
            setpoint_taken[*idx] = true;
        }
        net.generators.push_back(gen);
    }

    int branch_id = 0;
    for (const auto& row : rows_of("branch")) {
        require_columns(row, 11, "branch");
        const auto& v = row.values;
        Branch br;
        br.id = ++branch_id;
        br.from_bus = as_int(v[0], row.line, "branch from bus");
        br.to_bus = as_int(v[1], row.line, "branch to bus");
        br.r = v[2];
        br.x = v[3];
        br.b = v[4];
        br.shift_deg = v[9];
        // A zero ratio column marks a plain line; any explicit ratio, even
        // 1.0, marks a transformer.
        br.is_transformer = v[8] != 0.0 || v[9] != 0.0;
        br.tap = v[8] != 0.0 ? v[8] : 1.0;
        br.in_service = v[10] > 0.0;
        net.branches.push_back(br);
    }
    return net;
}

int line_of_offset(std::string_view text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

BusKind bus_kind_from(const std::string& s, int id)
{
    if (s == "PQ") return BusKind::PQ;
    if (s == "PV") return BusKind::PV;
    if (s == "slack") return BusKind::Slack;
    throw ValidationError("bus " + std::to_string(id) + ": unknown kind '" + s + "'");
}

template <typename T>
T field(const json& obj, const char* key, const std::string& entity)
{
    auto it = obj.find(key);
    if (it == obj.end())
        throw ValidationError(entity + ": missing field '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError(entity + ": field '" + key + "' has the wrong type");
    }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const std::string& entity)
{
    return obj.contains(key) ? field<T>(obj, key, entity) : fallback;
}

Network build_from_json(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }
    if (!doc.is_object())
        throw ParseError(1, "case JSON must be an object");

    Network net;
    net.name = field_or<std::string>(doc, "name", "", "case");
    net.base_mva = field_or<double>(doc, "base_mva", 100.0, "case");

    const json buses = doc.value("buses", json::array());
    for (const auto& [pos, item] : buses.items()) {
        const std::string entity = "bus entry " + pos;
        Bus bus;
        bus.id = field<int>(item, "id", entity);
        bus.kind = bus_kind_from(field<std::string>(item, "kind", entity), bus.id);
        bus.load_p = field_or<double>(item, "load_p", 0.0, entity);
        bus.load_q = field_or<double>(item, "load_q", 0.0, entity);
        bus.shunt_g = field_or<double>(item, "shunt_g", 0.0, entity);
        bus.shunt_b = field_or<double>(item, "shunt_b", 0.0, entity);
        bus.voltage_setpoint = field_or<double>(item, "voltage_setpoint", 1.0, entity);
        net.buses.push_back(bus);
    }
    const json branches = doc.value("branches", json::array());
    for (const auto& [pos, item] : branches.items()) {
        const std::string entity = "branch entry " + pos;
        Branch br;
        br.id = field<int>(item, "id", entity);
        br.from_bus = field<int>(item, "from_bus", entity);
        br.to_bus = field<int>(item, "to_bus", entity);
        br.r = field<double>(item, "r", entity);
        br.x = field<double>(item, "x", entity);
        br.b = field_or<double>(item, "b", 0.0, entity);
        br.tap = field_or<double>(item, "tap", 1.0, entity);
        br.shift_deg = field_or<double>(item, "shift_deg", 0.0, entity);
        br.is_transformer = field_or<bool>(item, "is_transformer", br.tap != 1.0 || br.shift_deg != 0.0, entity);
        br.in_service = field_or<bool>(item, "in_service", true, entity);
        net.branches.push_back(br);
    }
    const json generators = doc.value("generators", json::array());
    for (const auto& [pos, item] : generators.items()) {
        const std::string entity = "generator entry " + pos;
        Generator gen;
        gen.id = field<int>(item, "id", entity);
        gen.bus = field<int>(item, "bus", entity);
        gen.p_out = field_or<double>(item, "p_out", 0.0, entity);
        gen.q_out = field_or<double>(item, "q_out", 0.0, entity);
        gen.q_min = field_or<double>(item, "q_min", -9999.0, entity);
        gen.q_max = field_or<double>(item, "q_max", 9999.0, entity);
        gen.in_service = field_or<bool>(item, "in_service", true, entity);
        net.generators.push_back(gen);
    }
    net.reindex();
    return net;
}

std::string num(double v)
{
    if (std::isinf(v))
        return v > 0 ? "Inf" : "-Inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

int matpower_type(BusKind kind)
{
    switch (kind) {
    case BusKind::PQ: return 1;
    case BusKind::PV: return 2;
    case BusKind::Slack: return 3;
    }
    return 1;
}

}  // namespace

Network parse_case(std::string_view text, CaseFormat format)
{
    if (format == CaseFormat::Auto) {
        const auto first = text.find_first_not_of(" \t\r\n");
        format = (first != std::string_view::npos && text[first] == '{') ? CaseFormat::Json
                                                                         : CaseFormat::Matpower;
    }
    Network net = format == CaseFormat::Json ? build_from_json(text) : build_from_matpower(lex_matpower(text));
    net.validate();
    return net;
}

Network load_case(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open case file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    const auto format = path.extension() == ".json" ? CaseFormat::Json : CaseFormat::Auto;
    Network net = parse_case(buf.str(), format);
    if (net.name.empty())
        net.name = path.stem().string();
    return net;
}

std::string write_matpower(const Network& net)
{
    std::ostringstream out;
    if (!net.name.empty())
        out << "function mpc = " << net.name << "\n\n";
    out << "mpc.version = '2';\n";
    out << "mpc.baseMVA = " << num(net.base_mva) << ";\n\n";

    out << "%% bus data\n%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin\nmpc.bus = [\n";
    for (const auto& b : net.buses) {
        out << '\t' << b.id << '\t' << matpower_type(b.kind) << '\t' << num(b.load_p) << '\t' << num(b.load_q)
            << '\t' << num(b.shunt_g) << '\t' << num(b.shunt_b) << "\t1\t" << num(b.voltage_setpoint)
            << "\t0\t0\t1\t1.1\t0.9;\n";
    }
    out << "];\n\n";

    out << "%% generator data\n%\tbus\tPg\tQg\tQmax\tQmin\tVg\tmBase\tstatus\tPmax\tPmin\nmpc.gen = [\n";
    for (const auto& g : net.generators) {
        double vg = 1.0;
        if (auto idx = net.find_bus(g.bus))
            vg = net.buses[*idx].voltage_setpoint;
        out << '\t' << g.bus << '\t' << num(g.p_out) << '\t' << num(g.q_out) << '\t' << num(g.q_max) << '\t'
            << num(g.q_min) << '\t' << num(vg) << '\t' << num(net.base_mva) << '\t' << (g.in_service ? 1 : 0)
            << "\t0\t0;\n";
    }
    out << "];\n\n";

    out << "%% branch data\n%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\nmpc.branch = [\n";
    for (const auto& br : net.branches) {
        // A transformer at nominal ratio keeps an explicit 1 so the flag survives.
        const double ratio = br.is_transformer ? br.tap : 0.0;
        out << '\t' << br.from_bus << '\t' << br.to_bus << '\t' << num(br.r) << '\t' << num(br.x) << '\t'
            << num(br.b) << "\t0\t0\t0\t" << num(ratio) << '\t' << num(br.shift_deg) << '\t'
            << (br.in_service ? 1 : 0) << ";\n";
    }
    out << "];\n";
    return out.str();
}

std::string write_case_json(const Network& net)
{
    json doc;
    doc["name"] = net.name;
    doc["base_mva"] = net.base_mva;
    doc["buses"] = json::array();
    for (const auto& b : net.buses) {
        doc["buses"].push_back({{"id", b.id},
                                {"kind", to_string(b.kind)},
                                {"load_p", b.load_p},
                                {"load_q", b.load_q},
                                {"shunt_g", b.shunt_g},
                                {"shunt_b", b.shunt_b},
                                {"voltage_setpoint", b.voltage_setpoint}});
    }
    doc["branches"] = json::array();
    for (const auto& br : net.branches) {
        doc["branches"].push_back({{"id", br.id},
                                   {"from_bus", br.from_bus},
                                   {"to_bus", br.to_bus},
                                   {"r", br.r},
                                   {"x", br.x},
                                   {"b", br.b},
                                   {"tap", br.tap},
                                   {"shift_deg", br.shift_deg},
                                   {"is_transformer", br.is_transformer},
                                   {"in_service", br.in_service}});
    }
    doc["generators"] = json::array();
    for (const auto& g : net.generators) {
        doc["generators"].push_back({{"id", g.id},
                                     {"bus", g.bus},
                                     {"p_out", g.p_out},
                                     {"q_out", g.q_out},
                                     {"q_min", g.q_min},
                                     {"q_max", g.q_max},
                                     {"in_service", g.in_service}});
    }
    return doc.dump(2) + "\n";
}

}  // namespace relayrisk
