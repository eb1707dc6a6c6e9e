#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoforge/geometry.hpp"
#include "geoforge/rng.hpp"
#include "geoforge/statement.hpp"
#include "json.hpp"

namespace geoforge {

inline constexpr std::size_t kMaxScenePoints = 12;
inline constexpr int kPlacementAttempts = 50;
inline constexpr double kSceneExtent = 10.0;

using Segment = std::array<PointId, 2>;

struct CircleMark {
    PointId center;
    PointId through;
    friend bool operator==(const CircleMark&, const CircleMark&) = default;
};

// One applied construction (the base generator is the first one).
struct ConstructionStep {
    std::string id;
    std::vector<PointId> binding;
    std::vector<PointId> new_points;
    std::vector<Statement> effects;
    std::vector<Segment> segments;  // drawn in the diagram
    std::vector<CircleMark> circles;
};

struct ExtensionRecord {
    std::uint64_t seed = 0;
    int steps = 0;
    int applied = 0;
};

struct Scene {
    std::uint64_t seed = 0;
    std::string generator;
    SceneGeometry geometry;
    std::vector<ConstructionStep> constructions;
    StatementSet initial;
    std::vector<ExtensionRecord> extensions;
    bool short_of_steps = false;  // an extension ran out of applicable constructions

    bool has_segment(PointId a, PointId b) const;
    std::vector<Segment> drawn_segments() const;
    std::vector<CircleMark> drawn_circles() const;
};

class PlacementFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownGenerator : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// What a placer produces for one attempt; coordinates for new points are
// appended in order, effects may reference them by the returned ids.
struct Placement {
    std::vector<Coord> new_points;
    std::function<ConstructionStep(std::span<const PointId> binding, std::span<const PointId> fresh)> describe;
};

struct Construction {
    std::string id;
    std::size_t arity = 0;
    std::size_t new_point_count = 0;
    std::vector<std::string> preconditions;  // documentation form, e.g. "segment(b,c)", "!collinear(a,b,c)"
    std::function<bool(const Scene&, std::span<const PointId>)> admits;
    std::function<std::optional<Placement>(const Scene&, std::span<const PointId>, Rng&)> place;
};

struct Applicable {
    const Construction* construction = nullptr;
    std::vector<PointId> binding;
};

const std::vector<Construction>& construction_catalog();
const Construction* find_construction(std::string_view id);
const std::vector<std::string>& generator_catalog();

Scene generate_base_scene(std::string_view generator_id, std::uint64_t rng_seed);

// Applies one construction to a copy of the scene; nullopt when all placement
// attempts were degenerate.
std::optional<Scene> apply_construction(const Scene& scene, const Construction& c, std::span<const PointId> binding,
                                        Rng& rng);

std::vector<Applicable> applicable_constructions(const Scene& scene);

// Applies up to `steps` uniformly chosen constructions. short_of_steps is set
// if the scene ran out of options first.
Scene extend_scene(const Scene& scene, int steps, std::uint64_t rng_seed);

// Rebuilds a scene from (generator, seed, extension seeds).
Scene replay_scene(const Scene& scene);

nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);

}  // namespace geoforge
