#include "csbohm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include <nlohmann/json.hpp>

#include "csbohm/errors.hpp"

namespace csbohm {

namespace {

const char* character_label(CausalCharacter c) {
    switch (c) {
        case CausalCharacter::timelike: return "timelike";
        case CausalCharacter::lightlike: return "lightlike";
        default: return "spacelike";
    }
}

} // namespace

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[24];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, ptr);
}

std::string guidance_csv(const GuidanceField& field) {
    std::string out = "x,density,current,velocity,defined\n";
    for (std::size_t i = 0; i < field.grid.n; ++i) {
        out += format_double(field.grid.x(i));
        out += ',';
        out += format_double(field.density[i]);
        out += ',';
        out += format_double(field.current[i]);
        out += ',';
        if (field.defined[i]) out += format_double(field.velocity[i]);
        out += ',';
        out += field.defined[i] ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string worldline_csv(const WorldLine& line) {
    std::string out = "lambda,t,x,tau,character,turning\n";
    std::size_t next_turn = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        out += format_double(line.lambda[i]);
        out += ',';
        out += format_double(line.t[i]);
        out += ',';
        out += format_double(line.x[i]);
        out += ',';
        out += i < line.tau.size() ? format_double(line.tau[i]) : std::string{};
        out += ',';
        if (i > 0 && i - 1 < line.segment_character.size())
            out += character_label(line.segment_character[i - 1]);
        out += ',';
        bool turning = next_turn < line.turning_points.size() && line.turning_points[next_turn] == i;
        if (turning) ++next_turn;
        out += turning ? '1' : '0';
        out += '\n';
    }
    return out;
}

std::string density_csv(const Grid1D& grid, const RVec& values) {
    if (values.size() != grid.n) throw GridMismatch("density_csv: value count != grid size");
    std::string out = "x,value\n";
    for (std::size_t i = 0; i < grid.n; ++i) {
        out += format_double(grid.x(i));
        out += ',';
        out += format_double(values[i]);
        out += '\n';
    }
    return out;
}

std::string record_json(const EvolutionRecord& rec) {
    if (rec.snapshots.empty()) throw StructuralError("record_json: empty record");
    const Grid1D& g = rec.snapshots.front().grid;
    nlohmann::ordered_json j;
    j["grid"] = {{"n", g.n}, {"spacing", g.spacing}, {"origin", g.origin}};
    j["dt"] = rec.dt;
    j["direction"] = rec.direction == Direction::forward ? "forward" : "backward";
    j["leak_max"] = rec.leak_max;
    j["leak_warning"] = rec.leak_warning;
    auto times = nlohmann::ordered_json::array();
    auto snaps = nlohmann::ordered_json::array();
    for (const auto& f : rec.snapshots) {
        times.push_back(f.time);
        auto flat = nlohmann::ordered_json::array();
        for (const Complex& c : f.values) {
            flat.push_back(c.real());
            flat.push_back(c.imag());
        }
        snaps.push_back(std::move(flat));
    }
    j["times"] = std::move(times);
    j["snapshots"] = std::move(snaps);
    return j.dump();
}

EvolutionRecord record_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("record_from_json: ") + e.what());
    }
    try {
        Grid1D g{j.at("grid").at("n").get<std::size_t>(),
                 j.at("grid").at("spacing").get<double>(),
                 j.at("grid").at("origin").get<double>()};
        EvolutionRecord rec;
        rec.dt = j.at("dt").get<double>();
        rec.direction = j.at("direction").get<std::string>() == "backward" ? Direction::backward
                                                                           : Direction::forward;
        rec.leak_max = j.at("leak_max").get<double>();
        rec.leak_warning = j.at("leak_warning").get<bool>();
        const auto& times = j.at("times");
        const auto& snaps = j.at("snapshots");
        if (times.size() != snaps.size())
            throw ConfigError("record_from_json: times/snapshots length mismatch");
        for (std::size_t s = 0; s < snaps.size(); ++s) {
            const auto& flat = snaps[s];
            if (flat.size() != 2 * g.n)
                throw ConfigError("record_from_json: snapshot sample count != 2n");
            CVec v(g.n);
            for (std::size_t i = 0; i < g.n; ++i)
                v[i] = Complex(flat[2 * i].get<double>(), flat[2 * i + 1].get<double>());
            rec.snapshots.emplace_back(g, std::move(v), times[s].get<double>());
        }
        if (rec.snapshots.empty()) throw ConfigError("record_from_json: no snapshots");
        return rec;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("record_from_json: ") + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open for writing: " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ConfigError("write failed: " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open for reading: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace csbohm
