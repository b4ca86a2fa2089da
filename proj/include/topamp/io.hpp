#pragma once

// JSON model documents, CSV tables and content digests.

#include "topamp/errors.hpp"
#include "topamp/model.hpp"
#include "topamp/types.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace topamp::io {

using json = nlohmann::json;

// Shortest representation that reads back to the same double.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------- digest

class Fnv1a {
public:
    void update(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
    }
    void update(const std::string& s) { update(s.data(), s.size()); }
    void update(std::int64_t v) { update_le(static_cast<std::uint64_t>(v)); }
    void update(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        update_le(bits);
    }
    std::uint64_t value() const { return h_; }
    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(16, '0');
        for (int i = 0; i < 16; ++i) out[15 - i] = digits[(h_ >> (4 * i)) & 0xf];
        return out;
    }

private:
    void update_le(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        update(b, 8);
    }
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

inline void digest_matrix(Fnv1a& f, const Matrix& m) {
    f.update(static_cast<std::int64_t>(m.rows()));
    f.update(static_cast<std::int64_t>(m.cols()));
    for (Eigen::Index j = 0; j < m.rows(); ++j)
        for (Eigen::Index l = 0; l < m.cols(); ++l) {
            f.update(m(j, l).real());
            f.update(m(j, l).imag());
        }
}

// Digest of (Gamma^(p), Gamma^(d), G).
inline std::string model_digest(const LatticeModel& m) {
    Fnv1a f;
    digest_matrix(f, m.gamma_pump());
    digest_matrix(f, m.gamma_decay());
    digest_matrix(f, m.coherent());
    return f.hex();
}

inline std::string bytes_digest(const std::string& bytes) {
    Fnv1a f;
    f.update(bytes);
    return f.hex();
}

// ---------------------------------------------------------------- JSON

inline cplx complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ModelError("expected a number or an [re, im] pair, got " + j.dump());
}

inline json complex_to_json(cplx z) {
    return json::array({z.real(), z.imag()});
}

// Row-major nested rows of [re, im] pairs.
inline Matrix matrix_from_json(const json& j, const char* name) {
    if (!j.is_array() || j.empty()) throw ModelError(std::string(name) + ": expected a non-empty array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].size() != cols)
            throw ModelError(std::string(name) + ": rows must be arrays of equal length");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c]);
    }
    return m;
}

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Vector vector_from_json(const json& j, const char* name) {
    if (!j.is_array()) throw ModelError(std::string(name) + ": expected an array");
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v(i) = complex_from_json(j[i]);
    return v;
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ModelError(std::string("field '") + key + "' has the wrong type");
    }
}

inline ChainParams chain_from_json(const json& c) {
    if (!c.is_object()) throw ModelError("chain: expected an object");
    for (const auto& [key, _] : c.items()) {
        static const char* known[] = {"t_c", "t_d", "gamma_p", "phi", "n", "boundary"};
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ModelError("chain: unknown field '" + key + "'");
    }
    ChainParams p;
    p.t_c = get_or(c, "t_c", p.t_c);
    p.t_d = get_or(c, "t_d", p.t_d);
    p.gamma_p = get_or(c, "gamma_p", p.gamma_p);
    p.phi = get_or(c, "phi", p.phi);
    p.n_sites = get_or(c, "n", p.n_sites);
    return p;
}

inline json chain_to_json(const ChainParams& p) {
    return {{"t_c", p.t_c}, {"t_d", p.t_d}, {"gamma_p", p.gamma_p}, {"phi", p.phi}, {"n", p.n_sites}};
}

inline Boundary boundary_from_json(const json& c) {
    const std::string b = get_or<std::string>(c, "boundary", "open");
    if (b == "open") return Boundary::open;
    if (b == "periodic") return Boundary::periodic;
    throw ModelError("boundary must be 'open' or 'periodic'");
}

// {"chain": {...}} or {"custom": {"gamma_pump", "gamma_decay", "coherent"}},
// optionally with {"disorder": {"sigma", "seed"}}.
inline LatticeModel model_from_json(const json& doc) {
    if (!doc.is_object()) throw ModelError("model document must be a JSON object");
    const bool has_chain = doc.contains("chain"), has_custom = doc.contains("custom");
    if (has_chain == has_custom) throw ModelError("model document needs exactly one of 'chain' or 'custom'");
    LatticeModel m = has_chain
                         ? build_chain(chain_from_json(doc["chain"]), boundary_from_json(doc["chain"]))
                         : build_custom(matrix_from_json(doc["custom"].value("gamma_pump", json()), "gamma_pump"),
                                        matrix_from_json(doc["custom"].value("gamma_decay", json()), "gamma_decay"),
                                        matrix_from_json(doc["custom"].value("coherent", json()), "coherent"));
    if (doc.contains("disorder")) {
        const json& d = doc["disorder"];
        m = add_diagonal_disorder(m, get_or(d, "sigma", 0.0), get_or<std::uint64_t>(d, "seed", 0));
    }
    return m;
}

inline json model_to_json(const LatticeModel& m) {
    json doc;
    doc["custom"] = {{"gamma_pump", matrix_to_json(m.gamma_pump())},
                     {"gamma_decay", matrix_to_json(m.gamma_decay())},
                     {"coherent", matrix_to_json(m.coherent())}};
    doc["digest"] = model_digest(m);
    return doc;
}

// {"drive": {"site": j}} (1-based, amplitude optional) or {"drive": {"epsilon": [...]}};
// default is a unit drive at site 1.
inline Drive drive_from_json(const json& doc, Eigen::Index n) {
    if (!doc.contains("drive")) return Drive::at_site(n, 0);
    const json& d = doc["drive"];
    if (d.contains("epsilon")) {
        Drive out{vector_from_json(d["epsilon"], "drive.epsilon")};
        if (out.size() != n) throw ModelError("drive.epsilon length does not match N");
        return out;
    }
    const long site = get_or<long>(d, "site", 1);
    const cplx amp = d.contains("amplitude") ? complex_from_json(d["amplitude"]) : cplx(1.0);
    if (site < 1 || site > n) throw ModelError("drive.site out of range 1..N");
    return Drive::at_site(n, site - 1, amp);
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ModelError("malformed JSON in '" + path + "': " + e.what());
    }
}

// ---------------------------------------------------------------- CSV

using Cell = std::variant<double, long long, std::string>;

inline std::string csv_cell(const Cell& c) {
    if (const double* d = std::get_if<double>(&c)) return format_double(*d);
    if (const long long* i = std::get_if<long long>(&c)) return fmt(*i);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

// RFC 4180 table: CRLF record separators, quoted fields where needed.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : width_(header.size()) {
        std::vector<Cell> cells(header.begin(), header.end());
        append(cells);
    }

    void row(const std::vector<Cell>& cells) {
        if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
        append(cells);
    }

    const std::string& str() const { return text_; }

    void write(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ModelError("cannot write '" + path + "'");
        out << text_;
    }

private:
    void append(const std::vector<Cell>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += csv_cell(cells[i]);
        }
        text_ += "\r\n";
    }

    std::size_t width_;
    std::string text_;
};

} // namespace topamp::io
