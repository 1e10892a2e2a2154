#include "ltlreplan/workspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ltlreplan {

Footprint place(const Shape& shape, const Point& center) {
    if (const auto* r = std::get_if<RectShape>(&shape)) return centered_box(center, r->size);
    return Disc{center, std::get<DiscShape>(shape).radius};
}

Point ObstacleScript::position_at(double t) const {
    if (waypoints.empty()) throw std::logic_error("obstacle script without waypoints");
    if (waypoints.size() == 1 || speed <= 0.0 || t <= 0.0) return waypoints.front();

    std::vector<Point> path = waypoints;
    if (mode == ScriptMode::Loop) path.push_back(waypoints.front());
    std::vector<double> lengths;
    double total = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i) {
        lengths.push_back((path[i] - path[i - 1]).norm());
        total += lengths.back();
    }
    if (total <= 0.0) return waypoints.front();

    double s = speed * t;
    switch (mode) {
        case ScriptMode::Once: s = std::min(s, total); break;
        case ScriptMode::Loop: s = std::fmod(s, total); break;
        case ScriptMode::PingPong: {
            s = std::fmod(s, 2.0 * total);
            if (s > total) s = 2.0 * total - s;
            break;
        }
    }
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        if (s <= lengths[i] || i + 1 == lengths.size()) {
            const double u = lengths[i] > 0.0 ? std::min(1.0, s / lengths[i]) : 0.0;
            return path[i] + u * (path[i + 1] - path[i]);
        }
        s -= lengths[i];
    }
    return path.back();
}

Workspace::Workspace(Box bounds, std::vector<Region> regions, std::vector<Obstacle> obstacles)
    : bounds_(std::move(bounds)), regions_(std::move(regions)), obstacles_(std::move(obstacles)) {
    if (bounds_.isEmpty() || bounds_.volume() <= 0.0) throw std::invalid_argument("workspace bounds are empty");
    for (std::size_t i = 0; i < regions_.size(); ++i) {
        const Region& r = regions_[i];
        if (!bounds_.contains(r.rect)) throw std::invalid_argument("region '" + r.id + "' leaves the workspace bounds");
        for (std::size_t j = 0; j < i; ++j) {
            if (regions_[j].id == r.id) throw std::invalid_argument("duplicate region id '" + r.id + "'");
            if (regions_[j].rect.intersects(r.rect))
                throw std::invalid_argument("regions '" + regions_[j].id + "' and '" + r.id + "' overlap");
        }
    }
    for (std::size_t i = 0; i < obstacles_.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (obstacles_[j].id == obstacles_[i].id)
                throw std::invalid_argument("duplicate obstacle id '" + obstacles_[i].id + "'");
}

const Region* Workspace::find_region(const std::string& id) const {
    for (const auto& r : regions_)
        if (r.id == id) return &r;
    return nullptr;
}

const Obstacle* Workspace::find_obstacle(const std::string& id) const {
    for (const auto& o : obstacles_)
        if (o.id == id) return &o;
    return nullptr;
}

int Workspace::region_index_at(const Point& x) const {
    for (std::size_t i = 0; i < regions_.size(); ++i)
        if (regions_[i].rect.contains(x)) return static_cast<int>(i);
    return -1;
}

LabelSet Workspace::label_of(const Point& x) const {
    if (!bounds_.contains(x)) throw std::out_of_range("point outside the workspace bounds");
    const int i = region_index_at(x);
    return i < 0 ? LabelSet{} : regions_[i].labels;
}

LabelMask Workspace::mask_at(const Point& x) const {
    const int i = region_index_at(x);
    return i < 0 ? 0 : regions_[i].mask;
}

void Workspace::bind_alphabet(std::vector<std::string> alphabet) {
    alphabet_ = std::move(alphabet);
    for (auto& r : regions_) r.mask = mask_of(r.labels);
}

LabelMask Workspace::mask_of(const LabelSet& labels) const {
    LabelMask mask = 0;
    for (std::size_t i = 0; i < alphabet_.size(); ++i)
        if (labels.count(alphabet_[i])) mask |= LabelMask{1} << i;
    return mask;
}

bool Workspace::is_free(const Point& x, double clearance) const {
    if (!bounds_.contains(x)) return false;
    for (const auto& o : obstacles_)
        if (distance(o.footprint(), x) < clearance) return false;
    return true;
}

bool Workspace::segment_free(const Point& a, const Point& b, double clearance) const {
    if (!bounds_.contains(a) || !bounds_.contains(b)) return false;
    for (const auto& o : obstacles_)
        if (segment_distance(o.footprint(), a, b) < clearance) return false;
    return true;
}

namespace {

// Sample weights are formed from integers so a reversed segment visits bitwise-identical points.
template <typename F>
void sample_segment(const Point& a, const Point& b, double eps, F&& visit) {
    const double len = (b - a).norm();
    const long n = std::max(1L, static_cast<long>(std::ceil(len / eps)));
    for (long i = 0; i <= n; ++i) {
        const double wb = static_cast<double>(i) / static_cast<double>(n);
        const double wa = static_cast<double>(n - i) / static_cast<double>(n);
        visit(Point(a.x() * wa + b.x() * wb, a.y() * wa + b.y() * wb));
    }
}

}  // namespace

std::vector<LabelSet> Workspace::edge_trace(const Point& a, const Point& b, double eps) const {
    std::vector<LabelSet> out;
    int last = -2;
    sample_segment(a, b, eps, [&](const Point& p) {
        const int i = region_index_at(p);
        if (i == last) return;
        LabelSet labels = i < 0 ? LabelSet{} : regions_[i].labels;
        last = i;
        if (out.empty() || out.back() != labels) out.push_back(std::move(labels));
    });
    return out;
}

std::vector<LabelMask> Workspace::edge_trace_masks(const Point& a, const Point& b, double eps) const {
    std::vector<LabelMask> out;
    sample_segment(a, b, eps, [&](const Point& p) {
        const LabelMask m = mask_at(p);
        if (out.empty() || out.back() != m) out.push_back(m);
    });
    return out;
}

bool Workspace::set_region_labels(const std::string& id, const LabelSet& labels) {
    for (auto& r : regions_) {
        if (r.id != id) continue;
        if (r.labels == labels) return false;
        r.labels = labels;
        r.mask = mask_of(labels);
        ++label_version_;
        return true;
    }
    throw std::invalid_argument("unknown region '" + id + "'");
}

void Workspace::upsert_obstacle(const Obstacle& obstacle) {
    for (auto& o : obstacles_)
        if (o.id == obstacle.id) {
            o = obstacle;
            return;
        }
    obstacles_.push_back(obstacle);
}

bool Workspace::remove_obstacle(const std::string& id) {
    const auto it = std::find_if(obstacles_.begin(), obstacles_.end(), [&](const Obstacle& o) { return o.id == id; });
    if (it == obstacles_.end()) return false;
    obstacles_.erase(it);
    return true;
}

void Workspace::move_obstacle(const std::string& id, const Point& position) {
    for (auto& o : obstacles_)
        if (o.id == id) {
            o.position = position;
            return;
        }
    throw std::invalid_argument("unknown obstacle '" + id + "'");
}

void Workspace::advance_scripts(double t) {
    for (auto& o : obstacles_)
        if (o.script) o.position = o.script->position_at(t);
}

std::vector<Knowledge> sense(const Workspace& truth, const Point& pose, const Point& footprint_size) {
    const Box view = centered_box(pose, footprint_size);
    std::vector<Knowledge> out;
    for (const auto& r : truth.regions())
        if (view.intersects(r.rect)) out.push_back(RegionKnowledge{r.id, r.labels});
    for (const auto& o : truth.obstacles())
        if (intersects(o.footprint(), view))
            out.push_back(ObstacleKnowledge{o.id, o.position, o.shape, o.kind});
    return out;
}

KnowledgeBase::KnowledgeBase(Workspace prior, double displacement_threshold)
    : belief_(std::move(prior)), threshold_(displacement_threshold) {}

bool KnowledgeBase::apply(const Knowledge& k) {
    if (const auto* reg = std::get_if<RegionKnowledge>(&k)) return belief_.set_region_labels(reg->region, reg->labels);

    const auto& obs = std::get<ObstacleKnowledge>(k);
    if (!belief_.bounds().contains(obs.position)) throw std::invalid_argument("obstacle position outside the bounds");
    if (const Obstacle* known = belief_.find_obstacle(obs.id)) {
        if ((known->position - obs.position).norm() <= threshold_) return false;
        belief_.move_obstacle(obs.id, obs.position);
        return true;
    }
    belief_.upsert_obstacle(Obstacle{obs.id, obs.shape, obs.kind, obs.position, std::nullopt});
    return true;
}

}  // namespace ltlreplan
