#include "chfh/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace chfh {

namespace {

std::string format_double(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

bool parse_double(std::string_view s, double& out)
{
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_int(std::string_view s, int& out)
{
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::uint64_t to_little_endian(std::uint64_t v)
{
    if constexpr (std::endian::native == std::endian::big)
        return __builtin_bswap64(v);
    return v;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::string& path)
{
    out.flush();
    if (!out)
        throw IoError("write to " + path + " failed");
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (std::size_t k = 0; k <= s.size(); ++k)
        if (k == s.size() || s[k] == sep) {
            parts.push_back(s.substr(start, k - start));
            start = k + 1;
        }
    return parts;
}

} // namespace

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& text)
{
    std::ofstream out = open_out(path);
    out << text;
    finish(out, path);
}

void write_snapshot(const ScalarField& phi, const std::string& path, double t)
{
    const Grid& g = phi.grid();
    std::ofstream out = open_out(path);
    out << "CHFLD v1 " << g.nx << ' ' << g.ny << ' ' << format_double(g.lx) << ' ' << format_double(g.ly) << ' '
        << format_double(t) << '\n';
    std::vector<std::uint64_t> payload(phi.size());
    for (std::size_t k = 0; k < phi.size(); ++k)
        payload[k] = to_little_endian(std::bit_cast<std::uint64_t>(phi[k]));
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(std::uint64_t)));
    finish(out, path);
}

Snapshot read_snapshot_with_time(const std::string& path)
{
    const std::string bytes = read_text_file(path);
    const std::size_t eol = bytes.find('\n');
    if (eol == std::string::npos)
        throw IoError(path + ": missing CHFLD header line");
    const auto fields = split(std::string_view(bytes).substr(0, eol), ' ');
    int nx = 0, ny = 0;
    double lx = 0.0, ly = 0.0, t = 0.0;
    if (fields.size() != 7 || fields[0] != "CHFLD" || fields[1] != "v1" || !parse_int(fields[2], nx) ||
        !parse_int(fields[3], ny) || !parse_double(fields[4], lx) || !parse_double(fields[5], ly) ||
        !parse_double(fields[6], t))
        throw IoError(path + ": malformed header, expected \"CHFLD v1 nx ny lx ly t\"");
    Grid g;
    try {
        g = make_grid(nx, ny, lx, ly);
    } catch (const std::invalid_argument& e) {
        throw IoError(path + ": " + e.what());
    }
    if (!std::isfinite(t))
        throw IoError(path + ": non-finite time in header");

    const std::size_t expected = g.size() * sizeof(std::uint64_t);
    const std::size_t have = bytes.size() - eol - 1;
    if (have != expected)
        throw IoError(path + ": payload has " + std::to_string(have) + " bytes, header implies " +
                      std::to_string(expected));
    std::vector<double> values(g.size());
    const char* p = bytes.data() + eol + 1;
    for (std::size_t k = 0; k < values.size(); ++k) {
        std::uint64_t raw;
        std::memcpy(&raw, p + k * sizeof raw, sizeof raw);
        values[k] = std::bit_cast<double>(to_little_endian(raw));
        if (!std::isfinite(values[k]))
            throw IoError(path + ": non-finite value at index " + std::to_string(k));
    }
    return {ScalarField(g, std::move(values)), t};
}

ScalarField read_snapshot(const std::string& path)
{
    return read_snapshot_with_time(path).phi;
}

std::string ledger_csv(const RunLedger& ledger)
{
    std::string out = kLedgerHeader;
    out += '\n';
    for (const LedgerRow& r : ledger.rows) {
        const double cols[] = {r.t, r.mass, r.E, r.E0, r.grad_mu_sq, r.Lambda, r.B, r.sep, r.mu_bar, r.cum_dissipation};
        for (std::size_t k = 0; k < std::size(cols); ++k) {
            if (k)
                out += ',';
            out += format_double(cols[k]);
        }
        out += '\n';
    }
    return out;
}

void write_ledger_csv(const RunLedger& ledger, const std::string& path)
{
    write_text_file(path, ledger_csv(ledger));
}

RunLedger parse_ledger_csv(const std::string& text)
{
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty())
        lines.pop_back();
    if (lines.empty() || lines[0] != kLedgerHeader)
        throw IoError("ledger CSV: missing or unexpected header");
    RunLedger ledger;
    for (std::size_t n = 1; n < lines.size(); ++n) {
        const auto cols = split(lines[n], ',');
        double v[10];
        bool ok = cols.size() == 10;
        for (std::size_t k = 0; ok && k < 10; ++k)
            ok = parse_double(cols[k], v[k]);
        if (!ok)
            throw IoError("ledger CSV: malformed row on line " + std::to_string(n + 1));
        LedgerRow r;
        r.t = v[0];
        r.mass = v[1];
        r.E = v[2];
        r.E0 = v[3];
        r.grad_mu_sq = v[4];
        r.Lambda = v[5];
        r.B = v[6];
        r.sep = v[7];
        r.mu_bar = v[8];
        r.cum_dissipation = v[9];
        ledger.rows.push_back(r);
    }
    return ledger;
}

std::vector<unsigned char> gray_levels(const ScalarField& phi)
{
    const Grid& g = phi.grid();
    std::vector<unsigned char> px(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double v = phi.at(i, j);
            if (!std::isfinite(v))
                throw IoError("write_pgm: non-finite value");
            const double level = std::clamp(std::floor(127.5 + 127.5 * v), 0.0, 255.0);
            px[static_cast<std::size_t>(g.ny - 1 - j) * g.nx + i] = static_cast<unsigned char>(level);
        }
    return px;
}

void write_pgm(const ScalarField& phi, const std::string& path)
{
    const auto px = gray_levels(phi);
    std::ofstream out = open_out(path);
    out << "P5\n" << phi.grid().nx << ' ' << phi.grid().ny << "\n255\n";
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
    finish(out, path);
}

} // namespace chfh
