#pragma once

#include <string>

#include <json.hpp>

#include "waring/matrix.hpp"

namespace waring {

using json = nlohmann::json;

namespace detail {

inline std::pair<std::size_t, std::size_t> line_col_at(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

} // namespace detail

/// Parses a matrix document: {"n": N, "entries": [[..strings..]]} with
/// Gaussian-rational entries in the `a/b+c/di` grammar.
inline QMat parse_matrix_document(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        auto [line, col] = detail::line_col_at(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ParseError(std::string("matrix document: ") + e.what(), line, col);
    }
    if (!doc.is_object() || !doc.contains("n") || !doc.contains("entries"))
        throw ParseError("matrix document must contain \"n\" and \"entries\"");
    if (!doc["n"].is_number_integer())
        throw ParseError("matrix document: \"n\" must be an integer");
    long n = doc["n"].get<long>();
    if (n < 1) throw DimensionMismatch("matrix document: n must be >= 1");
    const json& rows = doc["entries"];
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(n))
        throw DimensionMismatch("matrix document: entries must be an n-row array");
    QMat m(static_cast<std::size_t>(n), static_cast<std::size_t>(n), GaussianRational(0));
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
        const json& row = rows[i];
        if (!row.is_array() || row.size() != static_cast<std::size_t>(n))
            throw DimensionMismatch("matrix document: row " + std::to_string(i) +
                                    " does not have n entries");
        for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j) {
            if (!row[j].is_string())
                throw ParseError("matrix document: entry (" + std::to_string(i) + "," +
                                 std::to_string(j) + ") must be a string");
            try {
                m.at(i, j) = parse_gaussian_rational(row[j].get<std::string>());
            } catch (const ParseError& e) {
                throw ParseError("entry (" + std::to_string(i) + "," + std::to_string(j) +
                                 "): " + e.what(), i + 1, j + 1);
            }
        }
    }
    return m;
}

inline json rational_matrix_document(const QMat& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(to_string(m.at(i, j)));
        rows.push_back(std::move(row));
    }
    return json{{"n", m.rows()}, {"entries", std::move(rows)}};
}

/// Output document for approximate matrices: decimal complex strings plus
/// the precision they were computed at, so downstream tools can bound error.
inline json complex_matrix_document(const CMat& m, unsigned precision_bits) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m.at(i, j).to_string());
        rows.push_back(std::move(row));
    }
    return json{{"n", m.rows()}, {"precision_bits", precision_bits}, {"entries", std::move(rows)}};
}

inline std::string matrix_document_string(const QMat& m) {
    return rational_matrix_document(m).dump(1);
}

} // namespace waring
