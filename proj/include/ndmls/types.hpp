#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace ndmls {

enum class ErrorKind {
    InvalidInput,
    DegenerateGrid,
    Exhausted,
    NoIntersection,
    DegenerateRegion,
    EmptyObject,
    DimensionMismatch,
    Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(const Point2&, const Point2&) = default;

    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(a - b); }

// (x, y)^perp = (-y, x)
inline Point2 perp(Point2 a) { return {-a.y, a.x}; }

constexpr double kPi = 3.14159265358979323846;

inline double deg_to_rad(double deg) { return deg * kPi / 180.0; }

struct ImageDims {
    int w = 0;
    int h = 0;
};

}  // namespace ndmls
