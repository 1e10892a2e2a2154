#include <algorithm>
#include <cmath>

#include "ltlreplan/live.hpp"

namespace ltlreplan::live {

using nlohmann::json;

namespace {

json point_json(const Point& p) { return json::array({p.x(), p.y()}); }

json rect_json(const Box& b) { return json::array({b.min().x(), b.min().y(), b.max().x(), b.max().y()}); }

json shape_json(const Obstacle& o) {
    if (const auto* r = std::get_if<RectShape>(&o.shape))
        return {{"type", "rect"}, {"size", point_json(r->size)}};
    return {{"type", "disc"}, {"radius", std::get<DiscShape>(o.shape).radius}};
}

/// Last region the polyline passes through; acceptance may happen mid-edge, so the endpoint alone is not enough.
int last_region_on(const std::vector<Point>& waypoints, const Workspace& ws) {
    constexpr double kStep = 0.005;
    for (std::size_t i = waypoints.size(); i-- > 0;) {
        if (const int r = ws.region_index_at(waypoints[i]); r >= 0) return r;
        if (i == 0) break;
        const Point d = waypoints[i - 1] - waypoints[i];
        const int n = static_cast<int>(std::ceil(d.norm() / kStep));
        for (int k = 1; k < n; ++k)
            if (const int r = ws.region_index_at(waypoints[i] + d * (double(k) / n)); r >= 0) return r;
    }
    return -1;
}

bool number_field(const json& msg, const char* key, double& out) {
    auto it = msg.find(key);
    if (it == msg.end() || !it->is_number()) return false;
    out = it->get<double>();
    return true;
}

}  // namespace

json event_message(const Event& e) {
    return {{"type", "event"}, {"t", e.t}, {"kind", e.kind}, {"detail", e.detail}};
}

LiveSession::LiveSession(sim::Scenario scenario, std::uint64_t seed)
    : scenario_(std::move(scenario)),
      planner_(sim::make_planner(sim::PlannerKind::Ours, scenario_, seed)),
      truth_(scenario_.truth) {
    truth_.bind_alphabet(planner_->dfa().alphabet());
}

std::vector<Event> LiveSession::step() {
    if (paused_ || planner_->mode() == Mode::Done) return {};
    truth_.advance_scripts(planner_->time());
    auto events = planner_->tick(scenario_.dt, truth_);
    for (const auto& e : events) {
        recent_.push_back(e);
        if (recent_.size() > kRecentEvents) recent_.pop_front();
    }
    return events;
}

json LiveSession::error(const std::string& cmd, const std::string& detail) {
    return {{"type", "event"}, {"t", planner_->time()}, {"kind", "error"}, {"cmd", cmd}, {"detail", detail}};
}

json LiveSession::ack(const std::string& cmd, const std::string& detail) {
    return {{"type", "event"}, {"t", planner_->time()}, {"kind", "ack"}, {"cmd", cmd}, {"detail", detail}};
}

json LiveSession::apply(const json& msg) {
    if (!msg.is_object() || msg.value("type", "") != "cmd") return error("", "expected {\"type\":\"cmd\", ...}");
    if (!msg.contains("cmd") || !msg["cmd"].is_string()) return error("", "missing cmd");
    const std::string cmd = msg["cmd"].get<std::string>();

    if (cmd == "pause") {
        paused_ = true;
        return ack(cmd, "paused");
    }
    if (cmd == "resume") {
        paused_ = false;
        return ack(cmd, "running");
    }
    if (cmd == "set_speed") {
        double f = 0.0;
        if (!number_field(msg, "factor", f) || !(f > 0.0) || f > 20.0) return error(cmd, "factor must lie in (0, 20]");
        speed_ = f;
        return ack(cmd, "speed " + std::to_string(f));
    }
    if (cmd == "add_obstacle") {
        double x = 0, y = 0, r = 0;
        if (!number_field(msg, "x", x) || !number_field(msg, "y", y) || !number_field(msg, "r", r))
            return error(cmd, "expected numeric x, y, r");
        if (!(r > 0.0) || !truth_.bounds().contains(Point(x, y))) return error(cmd, "obstacle must lie in bounds with r > 0");
        const std::string id = "op" + std::to_string(++added_);
        truth_.upsert_obstacle({id, DiscShape{r}, ObstacleKind::Dynamic, {x, y}, std::nullopt});
        return ack(cmd, id);
    }
    if (cmd == "move_obstacle") {
        double x = 0, y = 0;
        const std::string id = msg.value("id", "");
        if (!number_field(msg, "x", x) || !number_field(msg, "y", y)) return error(cmd, "expected numeric x, y");
        const Obstacle* o = truth_.find_obstacle(id);
        if (!o) return error(cmd, "unknown obstacle '" + id + "'");
        if (!truth_.bounds().contains(Point(x, y))) return error(cmd, "position out of bounds");
        Obstacle moved = *o;
        moved.script.reset();  // the operator takes over
        moved.position = {x, y};
        truth_.upsert_obstacle(moved);
        return ack(cmd, id);
    }
    if (cmd == "set_label") {
        const std::string region = msg.value("region", "");
        if (!truth_.find_region(region)) return error(cmd, "unknown region '" + region + "'");
        if (!msg.contains("labels") || !msg["labels"].is_array()) return error(cmd, "labels must be an array");
        LabelSet labels;
        for (const auto& l : msg["labels"]) {
            if (!l.is_string() || !ltlf::is_valid_atom_name(l.get<std::string>())) return error(cmd, "invalid label");
            labels.insert(l.get<std::string>());
        }
        truth_.set_region_labels(region, labels);
        if (msg.value("broadcast", true)) planner_->inform(RegionKnowledge{region, labels});
        return ack(cmd, region);
    }
    return error(cmd, "unknown command");
}

json LiveSession::snapshot() const {
    const PlannerBase& p = *planner_;
    const Workspace& belief = p.belief();
    json snap;
    snap["type"] = "snapshot";
    snap["scenario"] = scenario_.name;
    snap["time"] = p.time();
    snap["robot"] = {{"x", p.position().x()}, {"y", p.position().y()}, {"q", p.robot_state()}};
    snap["mode"] = to_string(p.mode());
    snap["paused"] = paused_;
    snap["speed"] = speed_;
    snap["bounds"] = rect_json(truth_.bounds());

    json regions = json::array();
    std::vector<ltlf::RegionLabel> region_masks;
    for (const auto& r : belief.regions()) {
        const Region* t = truth_.find_region(r.id);
        regions.push_back({{"id", r.id}, {"rect", rect_json(r.rect)}, {"labels", r.labels},
                           {"mismatch", t && t->labels != r.labels}});
        region_masks.push_back({r.id, r.mask});
    }
    snap["regions"] = regions;

    json obstacles = json::array();
    for (const auto& o : truth_.obstacles())
        obstacles.push_back({{"id", o.id}, {"shape", shape_json(o)}, {"pos", point_json(o.position)},
                             {"known", belief.find_obstacle(o.id) != nullptr}});
    snap["obstacles"] = obstacles;

    json forbidden = json::array();
    if (!p.dfa().is_bad(p.robot_state()))
        for (const auto& id : ltlf::forbidden_zones(p.dfa(), p.robot_state(), belief.mask_at(p.position()), region_masks))
            forbidden.push_back(id);
    snap["forbidden"] = forbidden;

    json path = json::array();
    for (const auto& w : p.current_path()) path.push_back(point_json(w));
    snap["path"] = path;

    json library = json::array();
    if (const auto* ours = dynamic_cast<const Planner*>(&p)) {
        for (const auto& s : ours->library().members()) {
            const int ri = last_region_on(s.waypoints, belief);
            library.push_back({{"id", s.id},
                               {"cost", std::isfinite(s.cost) ? json(s.cost) : json(nullptr)},
                               {"feasible", s.feasible},
                               {"final_region", ri >= 0 ? json(belief.regions()[ri].id) : json(nullptr)},
                               {"current", ours->current() && ours->current()->id == s.id}});
        }
    }
    snap["library"] = library;

    // Reservoir sample of tree edges keeps the payload bounded; fixed seed so equal states give equal snapshots.
    std::mt19937_64 edge_rng(0x5eed);
    const PlanGraph& g = p.graph();
    std::vector<std::pair<Point, Point>> edges;
    std::size_t seen = 0;
    for (std::size_t i = 0; i < g.node_slots(); ++i) {
        const NodeId id = static_cast<NodeId>(i);
        if (!g.in_tree(id) || g.node(id).parent == kNoNode) continue;
        const std::pair<Point, Point> e{g.node(g.node(id).parent).x, g.node(id).x};
        if (edges.size() < kMaxTreeEdges) edges.push_back(e);
        else if (std::size_t k = std::uniform_int_distribution<std::size_t>(0, seen)(edge_rng); k < kMaxTreeEdges)
            edges[k] = e;
        ++seen;
    }
    json tree = json::array();
    for (const auto& [a, b] : edges) tree.push_back(json::array({a.x(), a.y(), b.x(), b.y()}));
    snap["tree"] = tree;
    snap["tree_size"] = g.tree_size();

    json events = json::array();
    for (const auto& e : recent_) events.push_back({{"t", e.t}, {"kind", e.kind}, {"detail", e.detail}});
    snap["events"] = events;
    return snap;
}

}  // namespace ltlreplan::live
