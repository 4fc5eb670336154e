#pragma once

// Record emission for the command-line tool. Data goes to stdout only.

#include "json.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cocyclelab::cli {

enum class output_format { jsonl, csv };

struct record {
    std::string command;
    std::map<std::string, std::string> config; // full resolved config
    nlohmann::ordered_json result = nlohmann::ordered_json::object();
    std::vector<std::pair<double, double>> series; // --gnuplot-friendly rows
};

class emitter {
public:
    emitter(std::ostream& out, output_format format, bool gnuplot) : out_(out), format_(format), gnuplot_(gnuplot) {}

    void emit(const record& r);

private:
    void emit_csv(const record& r);

    std::ostream& out_;
    output_format format_;
    bool gnuplot_;
};

} // namespace cocyclelab::cli
