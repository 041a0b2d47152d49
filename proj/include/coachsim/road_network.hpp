#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coachsim/geometry.hpp"

namespace coachsim::sim {

enum class TurnKind { Straight, Left, Right };

/// One driving lane: a polyline centerline plus graph links.
/// Approach lanes run between intersections; connector lanes realize a
/// single turn inside an intersection box.
struct Lane {
    int id = -1;
    std::vector<Vec2> centerline;  // >= 2 points, meters
    double width = 3.5;
    double speed_limit = 8.33;     // m/s
    std::vector<int> successors;

    int road_id = -1;              // parallel-lane group; -1 for connectors
    int lane_index = 0;            // 0 = leftmost of its direction
    int left_lane = -1;            // adjacent same-direction lanes
    int right_lane = -1;
    bool is_connector = false;
    int end_intersection = -1;     // intersection this lane feeds (-1 none)
    int signal_group = -1;         // 0 = north-south, 1 = east-west approaches
    TurnKind turn = TurnKind::Straight;

    // cached arclength table, filled by finalize()
    std::vector<double> cum_length;
    double length = 0.0;

    void finalize();
    Vec2 point_at(double s) const;
    double heading_at(double s) const;
};

struct Intersection {
    int id = -1;
    Vec2 center;
    double half_size = 8.0;
    std::vector<int> incoming_lanes;
    int signal_id = -1;
};

/// Two-group alternating schedule: group 0 green for green_s[0] seconds,
/// then group 1 for green_s[1], repeating. Offset shifts the cycle start.
struct SignalSchedule {
    int id = -1;
    double green_s[2] = {20.0, 20.0};
    double offset_s = 0.0;

    double cycle_s() const { return green_s[0] + green_s[1]; }
    int green_group(double sim_time) const;
};

/// Marked crossing spanning all lanes of one road at an intersection edge.
struct Crosswalk {
    int id = -1;
    int intersection = -1;
    std::vector<int> lanes;     // approach lanes it spans
    Vec2 center;
    double axis_heading = 0.0;  // heading of the crossed road
    double span_across = 16.0;  // across the road, meters
    double span_along = 3.0;    // along the road, meters

    bool contains(const Vec2& p, double inflate = 0.0) const;
};

/// Walkable graph for pedestrians: corner nodes joined by sidewalk
/// segments, crosswalk crossings, and corner wraps at map borders.
struct PedNode {
    int id = -1;
    Vec2 pos;
};

struct PedEdge {
    int id = -1;
    int node_a = -1;
    int node_b = -1;
    double length = 0.0;
    bool is_crossing = false;    // crosswalk: legitimately crosses lanes
    int cross_signal_id = -1;    // signal gating the crossing
    int cross_signal_group = -1; // vehicle group that must be red to start
    int partner_edge = -1;       // sidewalk on the other side of the road
    int road_id = -1;            // -1 when the edge borders no roadway
    Vec2 across_dir;             // unit vector toward the partner sidewalk
    double across_dist = 0.0;

    Vec2 point_at(double s, const std::vector<PedNode>& nodes) const;
};

struct MapSpec {
    int grid_rows = 4;
    int grid_cols = 4;
    double block_m = 250.0;
    int lanes_per_direction = 2;
    double lane_width_m = 3.5;
    double speed_limit_mps = 8.33;  // 30 km/h default
    double connector_speed_limit_mps = 6.0;
    double signal_green_s = 20.0;
    bool stagger_signals = true;
};

struct RoadNetwork {
    MapSpec spec;
    std::vector<Lane> lanes;
    std::vector<Intersection> intersections;
    std::vector<SignalSchedule> signals;
    std::vector<Crosswalk> crosswalks;
    std::vector<PedNode> ped_nodes;
    std::vector<PedEdge> ped_edges;
    std::vector<std::vector<int>> ped_adjacency;  // node -> incident edges

    const Lane& lane(int id) const { return lanes.at(static_cast<std::size_t>(id)); }
    bool signal_green(int signal_id, int group, double sim_time) const;

    /// BFS route over the lane graph; includes both endpoints. Empty when
    /// unreachable.
    std::vector<int> route(int from_lane, int to_lane) const;

    /// True when p lies inside any lane corridor (connectors included).
    /// `shrink` pulls the corridor ends in, so points sitting exactly on a
    /// stop line do not count.
    bool in_lane_corridor(const Vec2& p, double shrink = 0.25) const;
    bool in_any_crosswalk(const Vec2& p, double inflate = 0.0) const;

    /// Throws std::invalid_argument when a structural invariant is broken.
    void validate() const;
};

/// Procedural signalized grid. Throws on degenerate specs.
RoadNetwork build_grid_network(const MapSpec& spec);

}  // namespace coachsim::sim
