// Copyright 2026-present the amsh project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "amsh/matrix_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>

namespace amsh {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("short write to " + path.string());
}

// Consumes the next "\n"-terminated line; returns false at end of input.
bool next_line(std::string_view& rest, std::string_view& line) {
    if (rest.empty()) return false;
    auto pos = rest.find('\n');
    if (pos == std::string_view::npos) {
        line = rest;
        rest = {};
    } else {
        line = rest.substr(0, pos);
        rest = rest.substr(pos + 1);
    }
    return true;
}

double parse_value(std::string_view token, const std::filesystem::path& path) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw std::runtime_error(path.string() + ": non-numeric token '" + std::string(token) + "'");
    if (!std::isfinite(v))
        throw std::runtime_error(path.string() + ": non-finite value '" + std::string(token) + "'");
    return v;
}

long long parse_count(std::string_view token, const std::filesystem::path& path) {
    long long v = -1;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || v < 0)
        throw std::runtime_error(path.string() + ": malformed header count '" + std::string(token) + "'");
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

Matrix load_matrix(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::string_view rest(text);
    std::string_view line;

    if (!next_line(rest, line))
        throw std::runtime_error(path.string() + ": malformed header (empty file)");

    // header: DMT 1 <rows> <cols>
    std::string_view fields[4];
    std::size_t nfields = 0;
    std::string_view h = line;
    while (!h.empty() && nfields < 4) {
        auto sp = h.find(' ');
        fields[nfields++] = h.substr(0, sp);
        h = (sp == std::string_view::npos) ? std::string_view{} : h.substr(sp + 1);
    }
    if (nfields != 4 || !h.empty() || fields[0] != "DMT" || fields[1] != "1")
        throw std::runtime_error(path.string() + ": malformed header '" + std::string(line) + "'");
    const long long rows = parse_count(fields[2], path);
    const long long cols = parse_count(fields[3], path);

    Matrix m(rows, cols);
    for (long long r = 0; r < rows; ++r) {
        if (!next_line(rest, line))
            throw std::runtime_error(path.string() + ": row count mismatch (expected " +
                                     std::to_string(rows) + " rows, got " + std::to_string(r) + ")");
        std::string_view row = line;
        for (long long c = 0; c < cols; ++c) {
            if (row.empty())
                throw std::runtime_error(path.string() + ": column count mismatch at data row " +
                                         std::to_string(r + 1));
            auto sp = row.find(' ');
            std::string_view token = row.substr(0, sp);
            row = (sp == std::string_view::npos) ? std::string_view{} : row.substr(sp + 1);
            m(r, c) = parse_value(token, path);
        }
        if (!row.empty())
            throw std::runtime_error(path.string() + ": column count mismatch at data row " +
                                     std::to_string(r + 1) + " (extra tokens)");
    }
    // only trailing whitespace may follow the declared rows
    while (next_line(rest, line)) {
        if (!line.empty())
            throw std::runtime_error(path.string() + ": row count mismatch (extra data rows)");
    }
    return m;
}

void store_matrix(const std::filesystem::path& path, const Matrix& m) {
    if (!m.allFinite() && m.size() > 0)
        throw std::invalid_argument("store_matrix: non-finite value in " + path.string());
    std::string out;
    out.reserve(static_cast<std::size_t>(m.size()) * 8 + 32);
    out += "DMT 1 ";
    out += std::to_string(m.rows());
    out += ' ';
    out += std::to_string(m.cols());
    out += '\n';
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c > 0) out += ' ';
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    write_file(path, out);
}

KvFile load_kv(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    std::string_view rest(text);
    std::string_view line;
    KvFile kv;
    while (next_line(rest, line)) {
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error(path.string() + ": malformed line '" + std::string(line) + "'");
        kv[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
    }
    return kv;
}

void store_kv(const std::filesystem::path& path, const KvFile& kv) {
    std::string out;
    for (const auto& [k, v] : kv) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    write_file(path, out);
}

const std::string& kv_get(const KvFile& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error("missing key '" + key + "'");
    return it->second;
}

double kv_get_double(const KvFile& kv, const std::string& key) {
    const std::string& s = kv_get(kv, key);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error("key '" + key + "' is not a number: '" + s + "'");
    return v;
}

long long kv_get_int(const KvFile& kv, const std::string& key) {
    const std::string& s = kv_get(kv, key);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error("key '" + key + "' is not an integer: '" + s + "'");
    return v;
}

}  // namespace amsh
