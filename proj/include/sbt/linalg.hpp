#ifndef SBT_LINALG_HPP
#define SBT_LINALG_HPP

#include <array>
#include <cmath>

namespace sbt {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }
    double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    Vec3 operator*(double c) const { return {c * x, c * y, c * z}; }
    Vec3 operator/(double c) const { return {x / c, y / c, z / c}; }
    Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    Vec3& operator-=(const Vec3& o) {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    Vec3& operator*=(double c) {
        x *= c;
        y *= c;
        z *= c;
        return *this;
    }
};

inline Vec3 operator*(double c, const Vec3& v) { return v * c; }

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }

inline Vec3 normalized(const Vec3& v) {
    const double n = norm(v);
    return {v.x / n, v.y / n, v.z / n};
}

// 3x3 matrix, row-major: m[3*i + j] is row i, column j.
struct Mat3 {
    std::array<double, 9> m{};

    double& operator()(int i, int j) { return m[3 * i + j]; }
    double operator()(int i, int j) const { return m[3 * i + j]; }

    static Mat3 identity() {
        Mat3 r;
        r.m = {1, 0, 0, 0, 1, 0, 0, 0, 1};
        return r;
    }
    static Mat3 zero() { return Mat3{}; }

    Mat3 operator+(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }
    Mat3 operator-(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = m[i] - o.m[i];
        return r;
    }
    Mat3 operator*(double c) const {
        Mat3 r;
        for (int i = 0; i < 9; ++i) r.m[i] = c * m[i];
        return r;
    }
    Mat3& operator+=(const Mat3& o) {
        for (int i = 0; i < 9; ++i) m[i] += o.m[i];
        return *this;
    }

    Vec3 apply(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    Mat3 transpose() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
        return r;
    }

    double trace() const { return m[0] + m[4] + m[8]; }
};

inline Mat3 operator*(double c, const Mat3& a) { return a * c; }

inline Mat3 outer(const Vec3& a, const Vec3& b) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = a[i] * b[j];
    return r;
}

inline double max_abs(const Mat3& a) {
    double r = 0.0;
    for (double v : a.m) r = std::max(r, std::abs(v));
    return r;
}

inline double max_abs(const Vec3& v) { return std::max({std::abs(v.x), std::abs(v.y), std::abs(v.z)}); }

// Rotation mapping unit axis/angle, used by the equivariance tests.
inline Mat3 rotation(const Vec3& axis, double angle) {
    const Vec3 u = normalized(axis);
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r = Mat3::identity() * c + outer(u, u) * (1.0 - c);
    r(0, 1) += -s * u.z;
    r(0, 2) += s * u.y;
    r(1, 0) += s * u.z;
    r(1, 2) += -s * u.x;
    r(2, 0) += -s * u.y;
    r(2, 1) += s * u.x;
    return r;
}

} // namespace sbt

#endif
