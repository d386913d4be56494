// trial_data.cpp — CSV parsing/writing and design-matrix construction.

#include "ancova/trial_data.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ancova/errors.hpp"

namespace ancova {

std::size_t TrialDataset::arm_count(int arm) const {
    std::size_t count = 0;
    for (int a : arms) count += (a == arm) ? 1 : 0;
    return count;
}

double TrialDataset::pi_hat() const {
    return static_cast<double>(arm_count(1)) / static_cast<double>(n());
}

void TrialDataset::validate() const {
    const std::size_t rows = n();
    if (arms.size() != rows) throw ValidationError("dataset: arms length does not match outcomes");
    if (covariates.cols() > 0 && covariates.rows() != rows)
        throw ValidationError("dataset: covariate rows do not match outcomes");
    if (covariate_names.size() != covariates.cols())
        throw ValidationError("dataset: covariate names do not match covariate columns");
    if (rows < 2) throw ValidationError("dataset: fewer than 2 rows");
    std::size_t treated = 0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (arms[i] != 0 && arms[i] != 1)
            throw ValidationError("dataset: arm indicator not in {0,1} at row " +
                                  std::to_string(i + 1));
        treated += static_cast<std::size_t>(arms[i]);
        if (!std::isfinite(outcomes[i]))
            throw ValidationError("dataset: non-finite outcome at row " + std::to_string(i + 1));
    }
    if (treated == 0 || treated == rows)
        throw ValidationError("dataset: both arms must be present");
    for (std::size_t j = 0; j < covariates.cols(); ++j) {
        for (std::size_t i = 0; i < rows; ++i) {
            if (!std::isfinite(covariates(i, j)))
                throw ValidationError("dataset: non-finite covariate '" + covariate_names[j] +
                                      "' at row " + std::to_string(i + 1));
        }
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t start = 0;
    while (start < s.size() && (s[start] == ' ' || s[start] == '\t')) ++start;
    return s.substr(start);
}

double parse_cell(const std::string& raw, std::size_t row, const std::string& column) {
    const std::string s = trim(raw);
    double value = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || s.empty()) {
        throw ValidationError("csv: non-numeric value '" + s + "' at row " + std::to_string(row) +
                              ", column '" + column + "'");
    }
    if (!std::isfinite(value)) {
        throw ValidationError("csv: non-finite value at row " + std::to_string(row) +
                              ", column '" + column + "'");
    }
    return value;
}

void format_number(std::string& out, double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    out.append(buf, ptr);
}

}  // namespace

TrialDataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("csv: cannot open file " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw ValidationError("csv: empty file " + path.string());
    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = trim(h);

    std::ptrdiff_t y_col = -1;
    std::ptrdiff_t a_col = -1;
    std::vector<std::size_t> w_cols;
    std::vector<std::string> w_names;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == "Y") {
            if (y_col >= 0) throw ValidationError("csv: duplicate column 'Y'");
            y_col = static_cast<std::ptrdiff_t>(j);
        } else if (header[j] == "A") {
            if (a_col >= 0) throw ValidationError("csv: duplicate column 'A'");
            a_col = static_cast<std::ptrdiff_t>(j);
        } else {
            if (header[j].empty()) throw ValidationError("csv: empty covariate column name");
            w_cols.push_back(j);
            w_names.push_back(header[j]);
        }
    }
    if (y_col < 0) throw ValidationError("csv: missing required column 'Y'");
    if (a_col < 0) throw ValidationError("csv: missing required column 'A'");

    std::vector<double> y;
    std::vector<int> a;
    std::vector<std::vector<double>> w(w_cols.size());

    std::size_t row = 1;  // data rows counted from 1
    while (std::getline(in, line)) {
        const std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ValidationError("csv: row " + std::to_string(row) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(header.size()));
        }
        y.push_back(parse_cell(cells[static_cast<std::size_t>(y_col)], row, "Y"));
        const double av = parse_cell(cells[static_cast<std::size_t>(a_col)], row, "A");
        if (av != 0.0 && av != 1.0) {
            throw ValidationError("csv: arm indicator not in {0,1} at row " +
                                  std::to_string(row) + ", column 'A'");
        }
        a.push_back(av == 1.0 ? 1 : 0);
        for (std::size_t j = 0; j < w_cols.size(); ++j) {
            w[j].push_back(parse_cell(cells[w_cols[j]], row, w_names[j]));
        }
        ++row;
    }
    if (y.size() < 2) throw ValidationError("csv: fewer than 2 data rows in " + path.string());

    TrialDataset data;
    data.outcomes = std::move(y);
    data.arms = std::move(a);
    data.covariate_names = std::move(w_names);
    data.covariates = Matrix(data.outcomes.size(), w.size());
    for (std::size_t j = 0; j < w.size(); ++j) {
        auto dest = data.covariates.col(j);
        for (std::size_t i = 0; i < w[j].size(); ++i) dest[i] = w[j][i];
    }
    data.validate();
    return data;
}

void write_csv(const TrialDataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("csv: cannot write file " + path.string());
    std::string buffer = "Y,A";
    for (const auto& name : data.covariate_names) {
        buffer += ',';
        buffer += name;
    }
    buffer += '\n';
    for (std::size_t i = 0; i < data.n(); ++i) {
        format_number(buffer, data.outcomes[i]);
        buffer += ',';
        buffer += data.arms[i] ? '1' : '0';
        for (std::size_t j = 0; j < data.k(); ++j) {
            buffer += ',';
            format_number(buffer, data.covariates(i, j));
        }
        buffer += '\n';
    }
    out << buffer;
}

DesignMatrix design_matrix(const TrialDataset& data) {
    const std::size_t n = data.n();
    const std::size_t k = data.k();
    DesignMatrix design;
    design.values = Matrix(n, k + 2);
    design.column_labels.reserve(k + 2);
    design.column_labels.emplace_back("(intercept)");
    design.column_labels.emplace_back("A");
    for (std::size_t i = 0; i < n; ++i) {
        design.values(i, 0) = 1.0;
        design.values(i, 1) = static_cast<double>(data.arms[i]);
    }
    for (std::size_t j = 0; j < k; ++j) {
        design.column_labels.push_back(data.covariate_names[j]);
        auto src = data.covariates.col(j);
        auto dest = design.values.col(j + 2);
        for (std::size_t i = 0; i < n; ++i) dest[i] = src[i];
    }
    return design;
}

}  // namespace ancova
