#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace chfh {

/// Cell-centered rectangular grid on [0, lx] x [0, ly].
///
/// Cell (i, j) has center ((i + 1/2) hx, (j + 1/2) hy) and is stored at
/// row-major index j * nx + i.
struct Grid {
    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    double ly = 0.0;
    double hx = 0.0;
    double hy = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx + i; }
    double cell_area() const { return hx * hy; }
    double area() const { return lx * ly; }
    double x_center(int i) const { return (i + 0.5) * hx; }
    double y_center(int j) const { return (j + 0.5) * hy; }

    std::size_t x_face_count() const { return static_cast<std::size_t>(nx + 1) * ny; }
    std::size_t y_face_count() const { return static_cast<std::size_t>(nx) * (ny + 1); }

    friend bool operator==(const Grid&, const Grid&) = default;
};

/// Throws std::invalid_argument unless nx, ny >= 4 and lx, ly > 0.
Grid make_grid(int nx, int ny, double lx, double ly);

/// Values of one scalar quantity on a grid, one per cell.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid& grid, double fill = 0.0);
    ScalarField(const Grid& grid, std::vector<double> values);

    template <class Fn>
    static ScalarField sample(const Grid& grid, Fn&& fn)
    {
        ScalarField out(grid);
        for (int j = 0; j < grid.ny; ++j)
            for (int i = 0; i < grid.nx; ++i)
                out.values_[grid.index(i, j)] = fn(grid.x_center(i), grid.y_center(j));
        return out;
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    const std::vector<double>& data() const { return values_; }

    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    double at(int i, int j) const { return values_[grid_.index(i, j)]; }

    bool all_finite() const;

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Face-centered coefficients. x-face (i, j), 0 <= i <= nx, sits between
/// cells (i-1, j) and (i, j) and is stored at j * (nx + 1) + i. y-face (i, j),
/// 0 <= j <= ny, sits between cells (i, j-1) and (i, j) and is stored at
/// j * nx + i. Boundary faces are zero, which encodes the no-flux condition.
struct FaceCoeffs {
    Grid grid;
    std::vector<double> x;
    std::vector<double> y;

    static FaceCoeffs constant(const Grid& grid, double value);
};

enum class FaceMean { arithmetic, harmonic };

/// Face values from cell values. Throws std::invalid_argument for harmonic
/// averaging of a non-positive cell value.
FaceCoeffs face_average(const ScalarField& cell, FaceMean mode = FaceMean::harmonic);

void require_same_grid(const Grid& a, const Grid& b, const char* what);

} // namespace chfh
