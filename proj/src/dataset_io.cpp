#include "qig/dataset_io.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace qig {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
        size_t b = cell.find_first_not_of(' ');
        cell = b == std::string::npos ? "" : cell.substr(b);
        if (cell.size() >= 2 && cell.front() == '"' && cell.back() == '"') cell = cell.substr(1, cell.size() - 2);
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

Eigen::MatrixXd read_csv(const std::string& path, std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
    header = split(line);
    std::vector<std::vector<double>> rows;
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \r\t") == std::string::npos) continue;
        auto cells = split(line);
        if (cells.size() != header.size())
            throw DataError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) + " fields");
        std::vector<double> row;
        for (const auto& c : cells) {
            try {
                size_t used = 0;
                row.push_back(std::stod(c, &used));
                if (used != c.size()) throw std::invalid_argument(c);
            } catch (const std::exception&) {
                throw DataError(path + ":" + std::to_string(lineno) + ": not a number '" + c + "'");
            }
        }
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(rows.size(), header.size());
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < header.size(); ++c) m(r, c) = rows[r][c];
    return m;
}

void write_csv(const std::string& path, const std::vector<std::string>& header, const Eigen::MatrixXd& data) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n' << std::setprecision(17);
    for (long r = 0; r < data.rows(); ++r) {
        for (long c = 0; c < data.cols(); ++c) out << (c ? "," : "") << data(r, c);
        out << '\n';
    }
}

InterventionalDataset load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed manifest '" + path + "': " + e.what());
    }
    fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        fs::path q(p);
        return (q.is_relative() ? base / q : q).string();
    };
    if (!j.contains("observational")) throw DataError("manifest lacks 'observational'");
    InterventionalDataset ds;
    Context obs;
    obs.data = read_csv(resolve(j.at("observational").get<std::string>()), ds.variables);
    ds.contexts.push_back(std::move(obs));
    if (j.contains("interventions"))
        for (const auto& e : j.at("interventions")) {
            std::vector<std::string> header;
            Eigen::MatrixXd m = read_csv(resolve(e.at("path").get<std::string>()), header);
            if (header.size() != ds.variables.size()) throw DataError("column count differs from the observational file");
            Context c;
            c.target = e.at("target").get<std::string>();
            c.data.resize(m.rows(), ds.p());
            for (size_t h = 0; h < header.size(); ++h) c.data.col(ds.variable_index(header[h])) = m.col(static_cast<long>(h));
            ds.contexts.push_back(std::move(c));
        }
    ds.validate();
    return ds;
}

std::string write_dataset(const InterventionalDataset& ds, const std::string& dir) {
    fs::create_directories(dir);
    nlohmann::json j;
    write_csv((fs::path(dir) / "observational.csv").string(), ds.variables, ds.contexts.at(0).data);
    j["observational"] = "observational.csv";
    j["interventions"] = nlohmann::json::array();
    for (int k = 1; k <= ds.K(); ++k) {
        std::string name = "intervention_" + std::to_string(k) + ".csv";
        write_csv((fs::path(dir) / name).string(), ds.variables, ds.contexts[k].data);
        j["interventions"].push_back({{"target", *ds.contexts[k].target}, {"path", name}});
    }
    std::string path = (fs::path(dir) / "manifest.json").string();
    std::ofstream(path) << j.dump(2) << '\n';
    return path;
}

InterventionalDataset centered(const InterventionalDataset& ds) {
    InterventionalDataset out = ds;
    for (auto& c : out.contexts) c.data = c.data.rowwise() - c.data.colwise().mean();
    return out;
}

}  // namespace qig
