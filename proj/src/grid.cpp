#include "chfh/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace chfh {

Grid make_grid(int nx, int ny, double lx, double ly)
{
    if (nx < 4 || ny < 4)
        throw std::invalid_argument("grid needs at least 4 cells per axis, got " + std::to_string(nx) +
                                    "x" + std::to_string(ny));
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
        throw std::invalid_argument("grid side lengths must be positive and finite");
    Grid g;
    g.nx = nx;
    g.ny = ny;
    g.lx = lx;
    g.ly = ly;
    g.hx = lx / nx;
    g.hy = ly / ny;
    return g;
}

ScalarField::ScalarField(const Grid& grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size())
        throw std::invalid_argument("field length " + std::to_string(values_.size()) +
                                    " does not match grid size " + std::to_string(grid_.size()));
}

bool ScalarField::all_finite() const
{
    for (double v : values_)
        if (!std::isfinite(v))
            return false;
    return true;
}

FaceCoeffs FaceCoeffs::constant(const Grid& grid, double value)
{
    FaceCoeffs fc{grid, std::vector<double>(grid.x_face_count(), 0.0),
                  std::vector<double>(grid.y_face_count(), 0.0)};
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 1; i < grid.nx; ++i)
            fc.x[static_cast<std::size_t>(j) * (grid.nx + 1) + i] = value;
    for (int j = 1; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i)
            fc.y[static_cast<std::size_t>(j) * grid.nx + i] = value;
    return fc;
}

FaceCoeffs face_average(const ScalarField& cell, FaceMean mode)
{
    const Grid& g = cell.grid();
    if (mode == FaceMean::harmonic) {
        for (double v : cell.values())
            if (!(v > 0.0))
                throw std::invalid_argument("harmonic face averaging needs positive cell values");
    }
    auto avg = [mode](double a, double b) {
        return mode == FaceMean::harmonic ? 2.0 * a * b / (a + b) : 0.5 * (a + b);
    };
    FaceCoeffs fc = FaceCoeffs::constant(g, 0.0);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
            fc.x[static_cast<std::size_t>(j) * (g.nx + 1) + i] = avg(cell.at(i - 1, j), cell.at(i, j));
    for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            fc.y[static_cast<std::size_t>(j) * g.nx + i] = avg(cell.at(i, j - 1), cell.at(i, j));
    return fc;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what)
{
    if (!(a == b))
        throw std::invalid_argument(std::string(what) + ": operands live on different grids");
}

} // namespace chfh
