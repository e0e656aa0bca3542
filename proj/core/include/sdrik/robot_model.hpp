#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdrik/geometry.hpp"

namespace sdrik {

enum class JointKind { Spherical, Revolute, Prismatic };

const char* to_string(JointKind k);

/// Directed joint between two links. Revolute joints rotate about the shared
/// z-axis of the (zero_rotation-adjusted) frames; prismatic joints slide along
/// it. Asymmetric angle intervals are symmetrized at load time by rotating
/// zero_rotation about z, so angle_limit is always a half-width.
struct JointEdge {
  int parent = -1;
  int child = -1;
  JointKind kind = JointKind::Revolute;
  Vec3 offset = Vec3::Zero();          // ^iT_j in the parent frame (revolute/spherical)
  Mat3 zero_rotation = Mat3::Identity();  // R_e (revolute) / R_p (prismatic)
  double angle_limit = M_PI;           // half-width alpha in [0, pi], revolute
  double ext_lo = 0.0;                 // tau_l, prismatic
  double ext_hi = 1.0;                 // tau_u, prismatic

  bool limited() const { return kind == JointKind::Revolute && angle_limit < M_PI - 1e-12; }
};

/// Two link paths that must propagate to the same end pose, after composing
/// path A's pose with `relative`. Paths share their first and last link ids.
struct Closure {
  std::vector<int> path_a;
  std::vector<int> path_b;
  Pose relative;
};

/// One step of the spanning-tree traversal: `forward` means the edge is used
/// parent-to-child.
struct TraversalStep {
  int edge = -1;
  bool forward = true;
};

/// Kinematic graph of a robot. Immutable after load; all operations are pure.
struct RobotGraph {
  std::vector<std::string> link_names;
  std::vector<JointEdge> edges;
  std::map<int, Pose> base_poses;  // link -> fixed world pose
  int end_effector = -1;
  std::vector<Closure> closures;

  // Spanning-tree traversal from the base links, computed at load time.
  std::vector<TraversalStep> tree;
  std::vector<int> cycle_edges;  // edges whose endpoints were both already reached

  int num_links() const { return static_cast<int>(link_names.size()); }
  int link_index(const std::string& name) const;  // throws ModelError if unknown
  bool is_base(int link) const { return base_poses.count(link) > 0; }

  std::vector<int> edges_of_kind(JointKind k) const;
};

/// Joint values keyed by edge index. Revolute angles are absolute within
/// [-alpha, alpha]; prismatic extensions are normalized to [0,1].
struct JointConfig {
  std::map<int, double> angles;
  std::map<int, double> extensions;
  std::map<int, Mat3> sphericals;  // relative rotation from parent to child
};

/// Parse and validate a robot description document (JSON).
RobotGraph load_model(const std::string& text);
RobotGraph load_model_file(const std::string& path);

/// Inverse of load_model up to field ordering.
std::string serialize_model(const RobotGraph& g);

/// World poses of every link for the given configuration, propagated over the
/// spanning tree. Throws ModelError on missing values or violated limits
/// (values are never clamped). Cycle edges are not used; their residuals can
/// be checked with edge_residual.
std::vector<Pose> forward_kinematics(const RobotGraph& g, const JointConfig& q);

/// Max abs violation of the edge's translation and rotation relations at the
/// given poses and configuration.
double edge_residual(const RobotGraph& g, const std::vector<Pose>& poses,
                     const JointConfig& q, int edge);

/// Pose propagated along a closure path (by link ids), starting from the pose
/// of the first link.
Pose propagate_path(const RobotGraph& g, const std::vector<Pose>& poses,
                    const JointConfig& q, const std::vector<int>& path);

/// Uniform sample within joint limits; deterministic given the seed.
JointConfig sample_config(const RobotGraph& g, std::uint64_t seed);

/// Analytic leg lengths ||T + R b_i - a_i|| of a 6-leg Stewart platform,
/// ordered by prismatic edge index. Throws ModelError on wrong topology.
std::vector<double> stewart_inverse_legs(const RobotGraph& g, const Pose& ee_pose);

/// Base and platform anchors (a_i, b_i) of a Stewart platform, ordered by
/// prismatic edge index.
struct StewartAnchors {
  std::vector<Vec3> base;      // a_i in world coordinates
  std::vector<Vec3> platform;  // b_i in the end-effector frame
  std::vector<int> legs;       // prismatic edge indices
};
StewartAnchors stewart_anchors(const RobotGraph& g);

}  // namespace sdrik
