#pragma once

#include <complex>
#include <cstddef>
#include <new>
#include <stdexcept>
#include <vector>

#include "nls/spectral_grid.hpp"

namespace nls {

using Complex = std::complex<double>;

/// 64-byte aligned storage so every buffer shares FFTW's SIMD alignment.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), alignment));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using ComplexBuffer = std::vector<Complex, AlignedAllocator<Complex>>;

enum class Space : unsigned char { physical = 0, frequency = 1 };

inline const char* to_string(Space s) {
  return s == Space::physical ? "physical" : "frequency";
}

/// Complex amplitudes on a SpectralGrid, row-major, tagged with the space
/// they live in.
class ComplexField {
 public:
  ComplexField(SpectralGrid grid, Space space)
      : grid_(std::move(grid)), values_(grid_.total_points()), space_(space) {}

  ComplexField(SpectralGrid grid, ComplexBuffer values, Space space)
      : grid_(std::move(grid)), values_(std::move(values)), space_(space) {
    if (values_.size() != grid_.total_points()) {
      throw std::invalid_argument("value count does not match grid size");
    }
  }

  const SpectralGrid& grid() const { return grid_; }
  Space space() const { return space_; }
  void set_space(Space s) { space_ = s; }

  std::size_t size() const { return values_.size(); }
  ComplexBuffer& values() { return values_; }
  const ComplexBuffer& values() const { return values_; }

  Complex& operator[](std::size_t i) { return values_[i]; }
  const Complex& operator[](std::size_t i) const { return values_[i]; }

  ComplexField& operator*=(Complex c) {
    for (auto& v : values_) v *= c;
    return *this;
  }
  ComplexField& operator+=(const ComplexField& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  ComplexField& operator-=(const ComplexField& o) {
    check_compatible(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }

  friend ComplexField operator*(Complex c, ComplexField f) { return f *= c; }
  friend ComplexField operator+(ComplexField a, const ComplexField& b) { return a += b; }
  friend ComplexField operator-(ComplexField a, const ComplexField& b) { return a -= b; }

  void check_compatible(const ComplexField& o) const {
    if (!(grid_ == o.grid_)) throw std::invalid_argument("fields live on different grids");
    if (space_ != o.space_) throw std::invalid_argument("fields live in different spaces");
  }

 private:
  SpectralGrid grid_;
  ComplexBuffer values_;
  Space space_;
};

}  // namespace nls
