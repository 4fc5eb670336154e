#include "emit.hpp"

#include <charconv>
#include <ostream>

namespace cocyclelab::cli {

namespace {

using json = nlohmann::ordered_json;

std::string shortest(double v)
{
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : "nan";
}

std::string csv_cell(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"')
            q += '"';
        q += c;
    }
    return q + '"';
}

std::string scalar_text(const json& v)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_null())
        return "";
    return v.dump();
}

// Objects flatten to dotted columns, arrays to ';'-joined cells.
void flatten(const json& v, const std::string& name, std::vector<std::pair<std::string, std::string>>& cols)
{
    if (v.is_object()) {
        for (const auto& [k, sub] : v.items())
            flatten(sub, name.empty() ? k : name + "." + k, cols);
    } else if (v.is_array()) {
        std::string cell;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i)
                cell += ';';
            cell += v[i].is_array() ? v[i].dump() : scalar_text(v[i]);
        }
        cols.emplace_back(name, cell);
    } else {
        cols.emplace_back(name, scalar_text(v));
    }
}

} // namespace

void emitter::emit(const record& r)
{
    if (gnuplot_) {
        for (const auto& [a, b] : r.series)
            out_ << shortest(a) << ' ' << shortest(b) << '\n';
        return;
    }
    if (format_ == output_format::csv) {
        emit_csv(r);
        return;
    }
    json j;
    j["command"] = r.command;
    j["config"] = json::object();
    for (const auto& [k, v] : r.config)
        j["config"][k] = v;
    j["result"] = r.result;
    out_ << j.dump() << '\n';
}

void emitter::emit_csv(const record& r)
{
    std::vector<std::pair<std::string, std::string>> cols;
    cols.emplace_back("command", r.command);
    for (const auto& [k, v] : r.config)
        cols.emplace_back("config." + k, v);
    flatten(r.result, "", cols);
    for (std::size_t i = 0; i < cols.size(); ++i)
        out_ << (i ? "," : "") << csv_cell(cols[i].first);
    out_ << '\n';
    for (std::size_t i = 0; i < cols.size(); ++i)
        out_ << (i ? "," : "") << csv_cell(cols[i].second);
    out_ << '\n';
}

} // namespace cocyclelab::cli
