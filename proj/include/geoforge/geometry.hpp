#pragma once

#include <optional>
#include <string>
#include <vector>

#include "geoforge/statement.hpp"

namespace geoforge {

struct Coord {
    double x = 0.0;
    double y = 0.0;

    friend Coord operator+(Coord a, Coord b) { return {a.x + b.x, a.y + b.y}; }
    friend Coord operator-(Coord a, Coord b) { return {a.x - b.x, a.y - b.y}; }
    friend Coord operator*(double k, Coord a) { return {k * a.x, k * a.y}; }
    friend bool operator==(Coord, Coord) = default;
};

double dot(Coord a, Coord b);
double cross(Coord a, Coord b);
double norm(Coord a);
double distance(Coord a, Coord b);
// Undirected angle at `vertex` between rays to a and b, in degrees [0, 180].
double angle_deg(Coord a, Coord vertex, Coord b);
// Signed area sign of (a, b, c); +1 counter-clockwise, -1 clockwise, 0 collinear.
int orientation(Coord a, Coord b, Coord c, double eps = 1e-9);
// p strictly between a and b on line ab (assumes collinearity).
bool strictly_between(Coord p, Coord a, Coord b);
bool same_side(Coord p, Coord q, Coord line_a, Coord line_b);
bool opposite_sides(Coord p, Coord q, Coord line_a, Coord line_b);
Coord rotate(Coord v, double degrees);

struct Tolerances {
    double eps_rel = 1e-9;
    double d_min_factor = 1e-3;  // times bounding-box diagonal
    double theta_min_deg = 5.0;
};

struct BoundingBox {
    Coord min;
    Coord max;
    double diagonal() const { return distance(min, max); }
};

// Numeric instance of a scene: coordinates indexed by PointId.
class SceneGeometry {
public:
    SceneGeometry() = default;
    explicit SceneGeometry(std::vector<Coord> points, Tolerances tol = {});

    PointId add_point(Coord c);
    std::size_t size() const { return points_.size(); }
    const Coord& at(PointId p) const;
    const std::vector<Coord>& points() const { return points_; }
    const Tolerances& tolerances() const { return tol_; }

    BoundingBox bounding_box() const;
    double d_min() const { return tol_.d_min_factor * bounding_box().diagonal(); }

private:
    std::vector<Coord> points_;
    Tolerances tol_;
};

struct StatementVerdict {
    bool holds = false;
    double residual = 0.0;
};

// Throws UnknownPoint if s names a point missing from g.
StatementVerdict check_statement(const SceneGeometry& g, const Statement& s);

struct SceneVerdict {
    bool valid = true;
    std::vector<Statement> failing;
    std::vector<std::string> degeneracies;
};

SceneVerdict check_scene(const SceneGeometry& g, const StatementSet& s0);

// True when every segment, angle and triangle named by s is non-degenerate on g
// (used to reject conclusions that hold only vacuously).
bool is_nondegenerate(const SceneGeometry& g, const Statement& s);

class DegenerateMeasurement : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NumericValue {
    double approx = 0.0;
    std::optional<Rational> exact;  // set when approx is within eps_rel of p/q, q <= 360
};

// query: SegmentLength / AngleMeasure / SegmentRatio with an empty value slot.
NumericValue numeric_answer(const SceneGeometry& g, const Statement& query);

// Coordinate measurement of the quantity named by a value-bearing predicate.
double measure(const SceneGeometry& g, const Statement& query);

std::optional<Rational> snap_rational(double v, double eps_rel, std::int64_t max_den = 360);

}  // namespace geoforge
