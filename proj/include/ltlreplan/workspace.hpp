#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ltlreplan/geometry.hpp"
#include "ltlreplan/ltlf/dfa.hpp"

namespace ltlreplan {

using ltlf::LabelMask;
using ltlf::LabelSet;

inline constexpr double kEdgeResolution = 0.05;
inline constexpr double kDefaultClearance = 0.1;
inline constexpr double kObstacleDisplacementThreshold = 0.25;
inline constexpr double kMaxDynamicSpeed = 0.2;

struct Region {
    std::string id;
    Box rect;
    LabelSet labels;
    LabelMask mask = 0;  // labels encoded over the bound alphabet
};

struct RectShape {
    Point size;
};
struct DiscShape {
    double radius;
};
/// Obstacle shape relative to its center position.
using Shape = std::variant<RectShape, DiscShape>;

Footprint place(const Shape& shape, const Point& center);

enum class ObstacleKind { Static, Dynamic };
enum class ScriptMode { Once, Loop, PingPong };

/// Piecewise-linear motion at constant speed, starting at waypoints[0] at t = 0.
struct ObstacleScript {
    std::vector<Point> waypoints;
    double speed = 0.0;
    ScriptMode mode = ScriptMode::Once;

    Point position_at(double t) const;
};

struct Obstacle {
    std::string id;
    Shape shape;
    ObstacleKind kind = ObstacleKind::Static;
    Point position;
    std::optional<ObstacleScript> script;

    Footprint footprint() const { return place(shape, position); }
};

/// Closed region rectangles, pairwise disjoint and inside the bounds.
class Workspace {
public:
    Workspace() = default;
    Workspace(Box bounds, std::vector<Region> regions, std::vector<Obstacle> obstacles);

    const Box& bounds() const { return bounds_; }
    const std::vector<Region>& regions() const { return regions_; }
    const std::vector<Obstacle>& obstacles() const { return obstacles_; }

    const Region* find_region(const std::string& id) const;
    const Obstacle* find_obstacle(const std::string& id) const;
    /// Index of the region containing x, or -1.
    int region_index_at(const Point& x) const;

    /// Throws std::out_of_range outside the bounds.
    LabelSet label_of(const Point& x) const;
    /// Label of x over the bound alphabet.
    LabelMask mask_at(const Point& x) const;

    /// Caches every region's label mask over `alphabet`.
    void bind_alphabet(std::vector<std::string> alphabet);
    const std::vector<std::string>& alphabet() const { return alphabet_; }
    LabelMask mask_of(const LabelSet& labels) const;

    /// In bounds and at least `clearance` from every obstacle footprint (closed).
    bool is_free(const Point& x, double clearance = kDefaultClearance) const;
    bool segment_free(const Point& a, const Point& b, double clearance = kDefaultClearance) const;

    /// Label sequence along the segment at spacing <= eps, consecutive duplicates collapsed.
    std::vector<LabelSet> edge_trace(const Point& a, const Point& b, double eps = kEdgeResolution) const;
    std::vector<LabelMask> edge_trace_masks(const Point& a, const Point& b, double eps = kEdgeResolution) const;

    /// Returns true if the labels changed.
    bool set_region_labels(const std::string& id, const LabelSet& labels);
    /// Inserts or replaces by id.
    void upsert_obstacle(const Obstacle& obstacle);
    bool remove_obstacle(const std::string& id);
    void move_obstacle(const std::string& id, const Point& position);

    /// Moves every scripted obstacle to its scripted position at time t.
    void advance_scripts(double t);

    /// Bumped on every region-label change.
    std::uint64_t label_version() const { return label_version_; }

private:
    Box bounds_;
    std::vector<Region> regions_;
    std::vector<Obstacle> obstacles_;
    std::vector<std::string> alphabet_;
    std::uint64_t label_version_ = 0;
};

struct RegionKnowledge {
    std::string region;
    LabelSet labels;
};

struct ObstacleKnowledge {
    std::string id;
    Point position;
    Shape shape;
    ObstacleKind kind = ObstacleKind::Dynamic;
};

using Knowledge = std::variant<RegionKnowledge, ObstacleKnowledge>;

/// Knowledge for every region and obstacle intersecting the footprint centered at pose.
std::vector<Knowledge> sense(const Workspace& truth, const Point& pose, const Point& footprint_size);

/// The robot's belief; starts from the prior workspace.
class KnowledgeBase {
public:
    explicit KnowledgeBase(Workspace prior, double displacement_threshold = kObstacleDisplacementThreshold);

    const Workspace& belief() const { return belief_; }
    Workspace& belief() { return belief_; }

    /// Region: changed iff labels differ; unknown region throws.
    /// Obstacle: changed iff unknown or displaced beyond the threshold since the last accepted position.
    bool apply(const Knowledge& k);

private:
    Workspace belief_;
    double threshold_;
};

}  // namespace ltlreplan
