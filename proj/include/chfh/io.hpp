#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "chfh/grid.hpp"
#include "chfh/ledger.hpp"

namespace chfh {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// CHFLD v1: the ASCII line "CHFLD v1 nx ny lx ly t" and a newline, then
/// nx*ny little-endian doubles in storage order. Reals in the header carry 17
/// significant digits, so read(write(x)) reproduces x bit for bit.
void write_snapshot(const ScalarField& phi, const std::string& path, double t = 0.0);

struct Snapshot {
    ScalarField phi;
    double t = 0.0;
};

/// Throws IoError on a malformed header, a payload of the wrong length or a
/// non-finite value.
Snapshot read_snapshot_with_time(const std::string& path);
ScalarField read_snapshot(const std::string& path);

inline constexpr const char* kLedgerHeader = "t,mass,E,E0,grad_mu_sq,Lambda,B,sep,mu_bar,cum_dissipation";

/// Header row plus one row per ledger row, 17 significant digits.
std::string ledger_csv(const RunLedger& ledger);
void write_ledger_csv(const RunLedger& ledger, const std::string& path);
/// Inverse of ledger_csv for the persisted columns.
RunLedger parse_ledger_csv(const std::string& text);

/// Gray level floor(127.5 + 127.5 phi) clamped to [0, 255]. Image rows run
/// from the top of the domain (largest y) down.
std::vector<unsigned char> gray_levels(const ScalarField& phi);
/// Binary PGM (P5) with maxval 255.
void write_pgm(const ScalarField& phi, const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

} // namespace chfh
