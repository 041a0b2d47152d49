#include "coachsim/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <stdexcept>

namespace coachsim::sim {

void Lane::finalize() {
    cum_length.assign(centerline.size(), 0.0);
    for (std::size_t i = 1; i < centerline.size(); ++i) {
        cum_length[i] = cum_length[i - 1] + distance(centerline[i - 1], centerline[i]);
    }
    length = cum_length.empty() ? 0.0 : cum_length.back();
}

Vec2 Lane::point_at(double s) const {
    if (centerline.size() < 2) return centerline.empty() ? Vec2{} : centerline.front();
    s = std::clamp(s, 0.0, length);
    for (std::size_t i = 1; i < centerline.size(); ++i) {
        if (s <= cum_length[i] || i + 1 == centerline.size()) {
            const double seg = cum_length[i] - cum_length[i - 1];
            const double t = seg > 0.0 ? (s - cum_length[i - 1]) / seg : 0.0;
            return centerline[i - 1] + (centerline[i] - centerline[i - 1]) * t;
        }
    }
    return centerline.back();
}

double Lane::heading_at(double s) const {
    if (centerline.size() < 2) return 0.0;
    s = std::clamp(s, 0.0, length);
    for (std::size_t i = 1; i < centerline.size(); ++i) {
        if (s <= cum_length[i] || i + 1 == centerline.size()) {
            const Vec2 d = centerline[i] - centerline[i - 1];
            return std::atan2(d.y, d.x);
        }
    }
    return 0.0;
}

int SignalSchedule::green_group(double sim_time) const {
    double m = std::fmod(sim_time - offset_s, cycle_s());
    if (m < 0.0) m += cycle_s();
    return m < green_s[0] ? 0 : 1;
}

bool Crosswalk::contains(const Vec2& p, double inflate) const {
    const double c = std::cos(axis_heading), s = std::sin(axis_heading);
    const Vec2 d = p - center;
    const double along = d.x * c + d.y * s;
    const double across = -d.x * s + d.y * c;
    return std::fabs(along) <= span_along * 0.5 + inflate &&
           std::fabs(across) <= span_across * 0.5 + inflate;
}

Vec2 PedEdge::point_at(double s, const std::vector<PedNode>& nodes) const {
    const Vec2& a = nodes[static_cast<std::size_t>(node_a)].pos;
    const Vec2& b = nodes[static_cast<std::size_t>(node_b)].pos;
    if (length <= 0.0) return a;
    const double t = std::clamp(s / length, 0.0, 1.0);
    return a + (b - a) * t;
}

bool RoadNetwork::signal_green(int signal_id, int group, double sim_time) const {
    if (signal_id < 0 || group < 0) return true;
    return signals.at(static_cast<std::size_t>(signal_id)).green_group(sim_time) == group;
}

std::vector<int> RoadNetwork::route(int from_lane, int to_lane) const {
    if (from_lane == to_lane) return {from_lane};
    std::vector<int> prev(lanes.size(), -2);
    std::deque<int> queue{from_lane};
    prev[static_cast<std::size_t>(from_lane)] = -1;
    while (!queue.empty()) {
        const int cur = queue.front();
        queue.pop_front();
        for (int nxt : lanes[static_cast<std::size_t>(cur)].successors) {
            if (prev[static_cast<std::size_t>(nxt)] != -2) continue;
            prev[static_cast<std::size_t>(nxt)] = cur;
            if (nxt == to_lane) {
                std::vector<int> path{to_lane};
                for (int at = cur; at != -1; at = prev[static_cast<std::size_t>(at)]) {
                    path.push_back(at);
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            queue.push_back(nxt);
        }
    }
    return {};
}

bool RoadNetwork::in_lane_corridor(const Vec2& p, double shrink) const {
    for (const Lane& ln : lanes) {
        double s_base = 0.0;
        for (std::size_t i = 1; i < ln.centerline.size(); ++i) {
            const Vec2 a = ln.centerline[i - 1];
            const Vec2 b = ln.centerline[i];
            const Vec2 ab = b - a;
            const double seg = ab.norm();
            if (seg <= 0.0) continue;
            const Vec2 u = ab * (1.0 / seg);
            const Vec2 ap = p - a;
            const double along = ap.dot(u);
            const double lat = std::fabs(ap.x * (-u.y) + ap.y * u.x);
            const double s_here = s_base + along;
            if (lat <= ln.width * 0.5 && s_here >= shrink && s_here <= ln.length - shrink &&
                along >= -1e-9 && along <= seg + 1e-9) {
                return true;
            }
            s_base += seg;
        }
    }
    return false;
}

bool RoadNetwork::in_any_crosswalk(const Vec2& p, double inflate) const {
    for (const Crosswalk& cw : crosswalks) {
        if (cw.contains(p, inflate)) return true;
    }
    return false;
}

void RoadNetwork::validate() const {
    for (const Lane& ln : lanes) {
        if (ln.centerline.size() < 2) throw std::invalid_argument("lane " + std::to_string(ln.id) + ": polyline needs >= 2 points");
        for (const Vec2& p : ln.centerline) {
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
                throw std::invalid_argument("lane " + std::to_string(ln.id) + ": non-finite coordinate");
            }
        }
        if (ln.speed_limit <= 0.0) throw std::invalid_argument("lane " + std::to_string(ln.id) + ": speed limit must be > 0");
        if (ln.width <= 0.0) throw std::invalid_argument("lane " + std::to_string(ln.id) + ": width must be > 0");
        for (int succ : ln.successors) {
            if (succ < 0 || succ >= static_cast<int>(lanes.size())) {
                throw std::invalid_argument("lane " + std::to_string(ln.id) + ": successor " + std::to_string(succ) + " does not exist");
            }
        }
    }
    for (const SignalSchedule& sg : signals) {
        if (sg.green_s[0] <= 0.0 || sg.green_s[1] <= 0.0) {
            throw std::invalid_argument("signal " + std::to_string(sg.id) + ": phase durations must be > 0");
        }
    }
    for (const Intersection& in : intersections) {
        for (int lid : in.incoming_lanes) {
            if (lid < 0 || lid >= static_cast<int>(lanes.size())) {
                throw std::invalid_argument("intersection incoming lane out of range");
            }
        }
    }
}

namespace {

struct Dir {
    int dx, dy;       // grid step
    Vec2 u;           // travel direction
    int signal_group; // 0 NS, 1 EW
};

constexpr int kEast = 0, kNorth = 1, kWest = 2, kSouth = 3;

const Dir kDirs[4] = {
    {1, 0, {1.0, 0.0}, 1},
    {0, 1, {0.0, 1.0}, 0},
    {-1, 0, {-1.0, 0.0}, 1},
    {0, -1, {0.0, -1.0}, 0},
};

Vec2 left_normal(const Vec2& u) { return {-u.y, u.x}; }

}  // namespace

RoadNetwork build_grid_network(const MapSpec& spec) {
    if (spec.grid_rows < 2 || spec.grid_cols < 2) throw std::invalid_argument("grid needs at least 2x2 intersections");
    if (spec.lanes_per_direction < 1) throw std::invalid_argument("lanes_per_direction must be >= 1");
    if (spec.lane_width_m <= 0.0 || spec.speed_limit_mps <= 0.0 || spec.signal_green_s <= 0.0) {
        throw std::invalid_argument("map dimensions and limits must be positive");
    }

    RoadNetwork net;
    net.spec = spec;

    const int rows = spec.grid_rows, cols = spec.grid_cols;
    const double lw = spec.lane_width_m;
    const double road_half = spec.lanes_per_direction * lw;
    const double corner = road_half + 1.0;  // sidewalk offset == intersection half
    const double inset = corner;
    if (spec.block_m <= 2.0 * inset + 20.0) throw std::invalid_argument("block too short for intersection geometry");

    auto inter_id = [&](int r, int c) { return r * cols + c; };
    auto inter_center = [&](int r, int c) { return Vec2{c * spec.block_m, r * spec.block_m}; };
    auto exists = [&](int r, int c) { return r >= 0 && r < rows && c >= 0 && c < cols; };

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            Intersection in;
            in.id = inter_id(r, c);
            in.center = inter_center(r, c);
            in.half_size = inset;
            in.signal_id = in.id;
            net.intersections.push_back(in);

            SignalSchedule sg;
            sg.id = in.id;
            sg.green_s[0] = sg.green_s[1] = spec.signal_green_s;
            if (spec.stagger_signals) {
                // Spread phases so no travel speed resonates with the grid.
                sg.offset_s = ((r * 3 + c * 5) % 7) / 7.0 * sg.cycle_s();
            }
            net.signals.push_back(sg);
        }
    }

    // Approach lanes, keyed by (from intersection, direction) for wiring.
    std::map<std::pair<int, int>, std::vector<int>> outgoing;  // (inter, dir) -> lane ids leaving inter
    std::map<std::pair<int, int>, std::vector<int>> incoming;  // (inter, dir) -> lane ids arriving from dir's opposite side
    std::map<int, std::vector<int>> road_lanes;                // road segment -> all lanes

    int next_road = 0;
    auto add_directed_lanes = [&](int from_r, int from_c, int dir_idx, int road_key) {
        const Dir& d = kDirs[dir_idx];
        const int to_r = from_r + d.dy, to_c = from_c + d.dx;
        const Vec2 a = inter_center(from_r, from_c);
        const Vec2 b = inter_center(to_r, to_c);
        const Vec2 l = left_normal(d.u);
        std::vector<int> ids;
        for (int k = 0; k < spec.lanes_per_direction; ++k) {
            Lane ln;
            ln.id = static_cast<int>(net.lanes.size());
            const Vec2 off = l * (-(0.5 + k) * lw);
            ln.centerline = {a + d.u * inset + off, b - d.u * inset + off};
            ln.width = lw;
            ln.speed_limit = spec.speed_limit_mps;
            ln.road_id = road_key;
            ln.lane_index = k;
            ln.end_intersection = inter_id(to_r, to_c);
            ln.signal_group = d.signal_group;
            ln.finalize();
            ids.push_back(ln.id);
            net.lanes.push_back(std::move(ln));
        }
        for (int k = 0; k < spec.lanes_per_direction; ++k) {
            Lane& ln = net.lanes[static_cast<std::size_t>(ids[static_cast<std::size_t>(k)])];
            if (k > 0) ln.left_lane = ids[static_cast<std::size_t>(k - 1)];
            if (k + 1 < spec.lanes_per_direction) ln.right_lane = ids[static_cast<std::size_t>(k + 1)];
        }
        outgoing[{inter_id(from_r, from_c), dir_idx}] = ids;
        incoming[{inter_id(to_r, to_c), dir_idx}] = ids;
        auto& rl = road_lanes[road_key];
        rl.insert(rl.end(), ids.begin(), ids.end());
        return ids;
    };

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (exists(r, c + 1)) {
                const int key = next_road++;
                add_directed_lanes(r, c, kEast, key);
                add_directed_lanes(r, c + 1, kWest, key);
            }
            if (exists(r + 1, c)) {
                const int key = next_road++;
                add_directed_lanes(r, c, kNorth, key);
                add_directed_lanes(r + 1, c, kSouth, key);
            }
        }
    }

    // Turn connectors inside each intersection.
    auto add_connector = [&](int from_lane, int to_lane, TurnKind turn) {
        Lane conn;
        conn.id = static_cast<int>(net.lanes.size());
        const Lane& src = net.lanes[static_cast<std::size_t>(from_lane)];
        const Lane& dst = net.lanes[static_cast<std::size_t>(to_lane)];
        conn.centerline = {src.centerline.back(), dst.centerline.front()};
        conn.width = lw;
        conn.speed_limit = turn == TurnKind::Straight ? spec.speed_limit_mps : spec.connector_speed_limit_mps;
        conn.is_connector = true;
        conn.turn = turn;
        conn.successors = {to_lane};
        conn.finalize();
        net.lanes[static_cast<std::size_t>(from_lane)].successors.push_back(conn.id);
        const int cid = conn.id;
        net.lanes.push_back(std::move(conn));
        return cid;
    };

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int iid = inter_id(r, c);
            for (int dir_idx = 0; dir_idx < 4; ++dir_idx) {
                auto it = incoming.find({iid, dir_idx});
                if (it == incoming.end()) continue;
                const std::vector<int>& lanes_in = it->second;
                const int straight_dir = dir_idx;
                const int left_dir = (dir_idx + 1) % 4;
                const int right_dir = (dir_idx + 3) % 4;
                auto out_of = [&](int d) -> const std::vector<int>* {
                    auto o = outgoing.find({iid, d});
                    return o == outgoing.end() ? nullptr : &o->second;
                };
                const auto* out_s = out_of(straight_dir);
                const auto* out_l = out_of(left_dir);
                const auto* out_r = out_of(right_dir);
                const int last = spec.lanes_per_direction - 1;
                for (int k = 0; k <= last; ++k) {
                    const int lid = lanes_in[static_cast<std::size_t>(k)];
                    net.intersections[static_cast<std::size_t>(iid)].incoming_lanes.push_back(lid);
                    auto pick = [&](const std::vector<int>& v) {
                        return v[static_cast<std::size_t>(std::min(k, static_cast<int>(v.size()) - 1))];
                    };
                    bool any = false;
                    if (out_s != nullptr) {
                        add_connector(lid, pick(*out_s), TurnKind::Straight);
                        any = true;
                    }
                    if (out_l != nullptr && (k == 0 || out_s == nullptr)) {
                        add_connector(lid, pick(*out_l), TurnKind::Left);
                        any = true;
                    }
                    if (out_r != nullptr && (k == last || out_s == nullptr)) {
                        add_connector(lid, pick(*out_r), TurnKind::Right);
                        any = true;
                    }
                    if (!any) throw std::invalid_argument("approach lane with no feasible turn");
                }
            }
        }
    }

    // Crosswalks: one per incident road per intersection.
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int iid = inter_id(r, c);
            for (int dir_idx = 0; dir_idx < 4; ++dir_idx) {
                const Dir& d = kDirs[dir_idx];
                if (!exists(r + d.dy, c + d.dx)) continue;
                Crosswalk cw;
                cw.id = static_cast<int>(net.crosswalks.size());
                cw.intersection = iid;
                cw.center = inter_center(r, c) + d.u * inset;
                cw.axis_heading = std::atan2(d.u.y, d.u.x);
                cw.span_across = 2.0 * road_half + 2.0;
                cw.span_along = 3.0;
                // Spanned lanes: every lane of the road leaving/arriving on this side.
                auto out_it = outgoing.find({iid, dir_idx});
                if (out_it != outgoing.end()) {
                    const int rk = net.lanes[static_cast<std::size_t>(out_it->second.front())].road_id;
                    cw.lanes = road_lanes[rk];
                }
                net.crosswalks.push_back(cw);
            }
        }
    }

    // Pedestrian graph. Corner order: (+,+), (-,+), (-,-), (+,-).
    const Vec2 corner_off[4] = {{corner, corner}, {-corner, corner}, {-corner, -corner}, {corner, -corner}};
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            for (int q = 0; q < 4; ++q) {
                PedNode n;
                n.id = inter_id(r, c) * 4 + q;
                n.pos = inter_center(r, c) + corner_off[q];
                net.ped_nodes.push_back(n);
            }
        }
    }

    auto add_ped_edge = [&](int na, int nb, bool crossing, int signal_id, int group, int road_id, Vec2 across, double across_dist) {
        PedEdge e;
        e.id = static_cast<int>(net.ped_edges.size());
        e.node_a = na;
        e.node_b = nb;
        e.length = distance(net.ped_nodes[static_cast<std::size_t>(na)].pos, net.ped_nodes[static_cast<std::size_t>(nb)].pos);
        e.is_crossing = crossing;
        e.cross_signal_id = signal_id;
        e.cross_signal_group = group;
        e.road_id = road_id;
        e.across_dir = across;
        e.across_dist = across_dist;
        net.ped_edges.push_back(e);
        return e.id;
    };

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int a = inter_id(r, c);
            if (exists(r, c + 1)) {
                const int b = inter_id(r, c + 1);
                const int rk = net.lanes[static_cast<std::size_t>(outgoing[{a, kEast}].front())].road_id;
                const int north = add_ped_edge(a * 4 + 0, b * 4 + 1, false, -1, -1, rk, {0.0, -1.0}, 2.0 * corner);
                const int south = add_ped_edge(a * 4 + 3, b * 4 + 2, false, -1, -1, rk, {0.0, 1.0}, 2.0 * corner);
                net.ped_edges[static_cast<std::size_t>(north)].partner_edge = south;
                net.ped_edges[static_cast<std::size_t>(south)].partner_edge = north;
            }
            if (exists(r + 1, c)) {
                const int b = inter_id(r + 1, c);
                const int rk = net.lanes[static_cast<std::size_t>(outgoing[{a, kNorth}].front())].road_id;
                const int east = add_ped_edge(a * 4 + 0, b * 4 + 3, false, -1, -1, rk, {-1.0, 0.0}, 2.0 * corner);
                const int west = add_ped_edge(a * 4 + 1, b * 4 + 2, false, -1, -1, rk, {1.0, 0.0}, 2.0 * corner);
                net.ped_edges[static_cast<std::size_t>(east)].partner_edge = west;
                net.ped_edges[static_cast<std::size_t>(west)].partner_edge = east;
            }
        }
    }

    // Crossing edges (crosswalks) or corner wraps on roadless sides.
    // Side corner pairs, matching kDirs order: E (0,3), N (0,1), W (1,2), S (2,3).
    const int side_corners[4][2] = {{0, 3}, {0, 1}, {1, 2}, {2, 3}};
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int iid = inter_id(r, c);
            for (int dir_idx = 0; dir_idx < 4; ++dir_idx) {
                const Dir& d = kDirs[dir_idx];
                const int na = iid * 4 + side_corners[dir_idx][0];
                const int nb = iid * 4 + side_corners[dir_idx][1];
                if (exists(r + d.dy, c + d.dx)) {
                    add_ped_edge(na, nb, true, iid, d.signal_group, -1, {0.0, 0.0}, 0.0);
                } else {
                    add_ped_edge(na, nb, false, -1, -1, -1, {0.0, 0.0}, 0.0);
                }
            }
        }
    }

    net.ped_adjacency.assign(net.ped_nodes.size(), {});
    for (const PedEdge& e : net.ped_edges) {
        net.ped_adjacency[static_cast<std::size_t>(e.node_a)].push_back(e.id);
        net.ped_adjacency[static_cast<std::size_t>(e.node_b)].push_back(e.id);
    }

    net.validate();
    return net;
}

}  // namespace coachsim::sim
