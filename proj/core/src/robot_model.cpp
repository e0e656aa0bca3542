#include "sdrik/robot_model.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sdrik/errors.hpp"

namespace sdrik {

using nlohmann::json;

const char* to_string(JointKind k) {
  switch (k) {
    case JointKind::Spherical: return "spherical";
    case JointKind::Revolute: return "revolute";
    case JointKind::Prismatic: return "prismatic";
  }
  return "?";
}

int RobotGraph::link_index(const std::string& name) const {
  auto it = std::find(link_names.begin(), link_names.end(), name);
  if (it == link_names.end()) throw ModelError("unknown link id '" + name + "'");
  return static_cast<int>(it - link_names.begin());
}

std::vector<int> RobotGraph::edges_of_kind(JointKind k) const {
  std::vector<int> out;
  for (int e = 0; e < static_cast<int>(edges.size()); ++e)
    if (edges[e].kind == k) out.push_back(e);
  return out;
}

namespace {

Mat3 parse_rotation(const json& arr, const std::string& field) {
  if (!arr.is_array() || arr.size() != 9) {
    throw ModelError(field + ": expected 9 row-major numbers");
  }
  Mat3 R;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) R(i, j) = arr[3 * i + j].get<double>();
  if (!is_rotation(R)) throw ModelError(field + ": not a rotation matrix");
  return R;
}

Vec3 parse_vec3(const json& arr, const std::string& field) {
  if (!arr.is_array() || arr.size() != 3) throw ModelError(field + ": expected 3 numbers");
  return Vec3(arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>());
}

/// BFS over undirected edges from the base links; fills tree and cycle_edges.
void build_traversal(RobotGraph& g) {
  const int n = g.num_links();
  std::vector<char> seen(n, 0);
  std::deque<int> queue;
  for (const auto& [link, pose] : g.base_poses) {
    seen[link] = 1;
    queue.push_back(link);
  }
  if (queue.empty()) throw ModelError("bases: at least one fixed base link is required");

  std::vector<std::vector<int>> incident(n);
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    incident[g.edges[e].parent].push_back(e);
    incident[g.edges[e].child].push_back(e);
  }

  std::vector<char> edge_used(g.edges.size(), 0);
  while (!queue.empty()) {
    int link = queue.front();
    queue.pop_front();
    for (int e : incident[link]) {
      if (edge_used[e]) continue;
      const JointEdge& je = g.edges[e];
      int other = je.parent == link ? je.child : je.parent;
      if (seen[other]) continue;  // classified later as cycle edge
      edge_used[e] = 1;
      seen[other] = 1;
      g.tree.push_back({e, je.parent == link});
      queue.push_back(other);
    }
  }
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e)
    if (!edge_used[e]) g.cycle_edges.push_back(e);

  for (int v = 0; v < n; ++v) {
    if (!seen[v]) {
      throw ModelError("links: graph is disconnected, link '" + g.link_names[v] +
                       "' is unreachable from every base");
    }
  }
}

}  // namespace

RobotGraph load_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(std::string("document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ModelError("document: expected a JSON object");
  for (const char* key : {"links", "bases", "joints", "end_effector"}) {
    if (!doc.contains(key)) throw ModelError(std::string(key) + ": missing required key");
  }

  RobotGraph g;
  if (!doc["links"].is_array()) throw ModelError("links: expected an array of ids");
  for (const auto& l : doc["links"]) {
    std::string name = l.get<std::string>();
    if (std::find(g.link_names.begin(), g.link_names.end(), name) != g.link_names.end()) {
      throw ModelError("links: duplicate id '" + name + "'");
    }
    g.link_names.push_back(name);
  }

  for (const auto& [name, pose] : doc["bases"].items()) {
    int idx = g.link_index(name);
    Pose p;
    if (pose.contains("R")) p.rotation = parse_rotation(pose["R"], "bases." + name + ".R");
    if (pose.contains("T")) p.translation = parse_vec3(pose["T"], "bases." + name + ".T");
    g.base_poses[idx] = p;
  }

  if (!doc["joints"].is_array()) throw ModelError("joints: expected an array");
  int jidx = 0;
  for (const auto& j : doc["joints"]) {
    std::string where = "joints[" + std::to_string(jidx) + "]";
    JointEdge e;
    e.parent = g.link_index(j.at("parent").get<std::string>());
    e.child = g.link_index(j.at("child").get<std::string>());
    if (e.parent == e.child) throw ModelError(where + ": parent and child coincide");

    std::string kind = j.at("kind").get<std::string>();
    if (kind == "spherical") e.kind = JointKind::Spherical;
    else if (kind == "revolute") e.kind = JointKind::Revolute;
    else if (kind == "prismatic") e.kind = JointKind::Prismatic;
    else throw ModelError(where + ".kind: unknown kind '" + kind + "'");

    if (j.contains("offset")) {
      if (e.kind == JointKind::Prismatic) {
        throw ModelError(where + ".offset: prismatic joints have no fixed offset");
      }
      e.offset = parse_vec3(j["offset"], where + ".offset");
    }
    if (j.contains("zero_rotation")) {
      e.zero_rotation = parse_rotation(j["zero_rotation"], where + ".zero_rotation");
    }

    if (e.kind == JointKind::Revolute) {
      if (j.contains("angle_limits")) {
        const auto& lim = j["angle_limits"];
        if (!lim.is_array() || lim.size() != 2) {
          throw ModelError(where + ".angle_limits: expected [lo, hi]");
        }
        double lo = lim[0].get<double>(), hi = lim[1].get<double>();
        if (lo > hi) throw ModelError(where + ".angle_limits: lo > hi");
        double mid = 0.5 * (lo + hi);
        double alpha = 0.5 * (hi - lo);
        if (std::abs(mid) > 1e-15) e.zero_rotation = e.zero_rotation * rot_z(mid);
        e.angle_limit = std::min(alpha, M_PI);  // wider than a full turn is unlimited
      }
    } else if (j.contains("angle_limits")) {
      throw ModelError(where + ".angle_limits: only revolute joints take angle limits");
    }

    if (e.kind == JointKind::Prismatic) {
      if (!j.contains("extension_limits")) {
        throw ModelError(where + ".extension_limits: required for prismatic joints");
      }
      const auto& lim = j["extension_limits"];
      if (!lim.is_array() || lim.size() != 2) {
        throw ModelError(where + ".extension_limits: expected [tau_l, tau_u]");
      }
      e.ext_lo = lim[0].get<double>();
      e.ext_hi = lim[1].get<double>();
      if (!(e.ext_lo < e.ext_hi)) {
        throw ModelError(where + ".extension_limits: tau_l must be < tau_u");
      }
    } else if (j.contains("extension_limits")) {
      throw ModelError(where + ".extension_limits: only prismatic joints take extension limits");
    }

    g.edges.push_back(e);
    ++jidx;
  }

  g.end_effector = g.link_index(doc["end_effector"].get<std::string>());

  if (doc.contains("closures")) {
    int cidx = 0;
    for (const auto& c : doc["closures"]) {
      std::string where = "closures[" + std::to_string(cidx) + "]";
      Closure cl;
      for (const auto& id : c.at("path_a")) cl.path_a.push_back(g.link_index(id.get<std::string>()));
      for (const auto& id : c.at("path_b")) cl.path_b.push_back(g.link_index(id.get<std::string>()));
      if (cl.path_a.size() < 2 || cl.path_b.size() < 2) {
        throw ModelError(where + ": paths need at least two links");
      }
      if (cl.path_a.front() != cl.path_b.front() || cl.path_a.back() != cl.path_b.back()) {
        throw ModelError(where + ": the two paths must share start and end link ids");
      }
      if (c.contains("relative")) {
        if (c["relative"].contains("R"))
          cl.relative.rotation = parse_rotation(c["relative"]["R"], where + ".relative.R");
        if (c["relative"].contains("T"))
          cl.relative.translation = parse_vec3(c["relative"]["T"], where + ".relative.T");
      }
      g.closures.push_back(cl);
      ++cidx;
    }
  }

  build_traversal(g);

  // Closure paths must follow graph edges.
  auto check_path = [&](const std::vector<int>& path, const std::string& where) {
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      bool found = false;
      for (const auto& e : g.edges) {
        if ((e.parent == path[i] && e.child == path[i + 1]) ||
            (e.child == path[i] && e.parent == path[i + 1])) {
          found = true;
          break;
        }
      }
      if (!found) {
        throw ModelError(where + ": no edge between '" + g.link_names[path[i]] + "' and '" +
                         g.link_names[path[i + 1]] + "'");
      }
    }
  };
  for (size_t c = 0; c < g.closures.size(); ++c) {
    check_path(g.closures[c].path_a, "closures[" + std::to_string(c) + "].path_a");
    check_path(g.closures[c].path_b, "closures[" + std::to_string(c) + "].path_b");
  }
  return g;
}

RobotGraph load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open robot file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

std::string serialize_model(const RobotGraph& g) {
  json doc;
  doc["links"] = g.link_names;
  json bases = json::object();
  for (const auto& [link, pose] : g.base_poses) {
    json p;
    std::vector<double> r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r.push_back(pose.rotation(i, j));
    p["R"] = r;
    p["T"] = {pose.translation[0], pose.translation[1], pose.translation[2]};
    bases[g.link_names[link]] = p;
  }
  doc["bases"] = bases;
  json joints = json::array();
  for (const auto& e : g.edges) {
    json j;
    j["parent"] = g.link_names[e.parent];
    j["child"] = g.link_names[e.child];
    j["kind"] = to_string(e.kind);
    if (e.kind != JointKind::Prismatic) {
      j["offset"] = {e.offset[0], e.offset[1], e.offset[2]};
    }
    std::vector<double> r;
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) r.push_back(e.zero_rotation(i, k));
    j["zero_rotation"] = r;
    if (e.kind == JointKind::Revolute) {
      j["angle_limits"] = {-e.angle_limit, e.angle_limit};
    }
    if (e.kind == JointKind::Prismatic) {
      j["extension_limits"] = {e.ext_lo, e.ext_hi};
    }
    joints.push_back(j);
  }
  doc["joints"] = joints;
  doc["end_effector"] = g.link_names[g.end_effector];
  if (!g.closures.empty()) {
    json closures = json::array();
    for (const auto& c : g.closures) {
      json jc;
      std::vector<std::string> pa, pb;
      for (int l : c.path_a) pa.push_back(g.link_names[l]);
      for (int l : c.path_b) pb.push_back(g.link_names[l]);
      jc["path_a"] = pa;
      jc["path_b"] = pb;
      std::vector<double> r;
      for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) r.push_back(c.relative.rotation(i, k));
      jc["relative"]["R"] = r;
      jc["relative"]["T"] = {c.relative.translation[0], c.relative.translation[1],
                             c.relative.translation[2]};
      closures.push_back(jc);
    }
    doc["closures"] = closures;
  }
  return doc.dump(2);
}

namespace {

/// Relative child rotation and parent-frame displacement of an edge at the
/// given joint value.
struct EdgeMotion {
  Mat3 rel;   // R_parent^T R_child
  Vec3 dpar;  // (T_child - T_parent) expressed with the parent rotation applied later
  bool dpar_in_child_axis = false;  // prismatic: displacement along (R_i R_p) e3
  double slide = 0.0;
};

EdgeMotion edge_motion(const RobotGraph& g, const JointConfig& q, int ei) {
  const JointEdge& e = g.edges[ei];
  EdgeMotion m;
  switch (e.kind) {
    case JointKind::Revolute: {
      double theta = 0.0;
      auto it = q.angles.find(ei);
      if (it != q.angles.end()) theta = it->second;
      else if (e.angle_limit > 1e-15)
        throw ModelError("missing joint value for revolute edge " + std::to_string(ei));
      if (std::abs(theta) > e.angle_limit + 1e-12) {
        throw ModelError("revolute edge " + std::to_string(ei) + ": |theta| exceeds limit " +
                         std::to_string(e.angle_limit));
      }
      m.rel = e.zero_rotation * rot_z(theta);
      m.dpar = e.offset;
      break;
    }
    case JointKind::Spherical: {
      auto it = q.sphericals.find(ei);
      if (it == q.sphericals.end())
        throw ModelError("missing joint value for spherical edge " + std::to_string(ei));
      m.rel = it->second;
      m.dpar = e.offset;
      break;
    }
    case JointKind::Prismatic: {
      auto it = q.extensions.find(ei);
      if (it == q.extensions.end())
        throw ModelError("missing joint value for prismatic edge " + std::to_string(ei));
      double tau = it->second;
      if (tau < -1e-12 || tau > 1.0 + 1e-12) {
        throw ModelError("prismatic edge " + std::to_string(ei) + ": tau outside [0,1]");
      }
      m.rel = e.zero_rotation;
      m.slide = e.ext_lo + tau * (e.ext_hi - e.ext_lo);
      m.dpar_in_child_axis = true;
      break;
    }
  }
  return m;
}

}  // namespace

std::vector<Pose> forward_kinematics(const RobotGraph& g, const JointConfig& q) {
  std::vector<Pose> poses(g.num_links());
  for (const auto& [link, pose] : g.base_poses) poses[link] = pose;

  for (const TraversalStep& step : g.tree) {
    const JointEdge& e = g.edges[step.edge];
    EdgeMotion m = edge_motion(g, q, step.edge);
    if (step.forward) {
      const Pose& pi = poses[e.parent];
      Pose pj;
      pj.rotation = pi.rotation * m.rel;
      pj.translation = m.dpar_in_child_axis ? Vec3(pi.translation + m.slide * pj.rotation.col(2))
                                            : Vec3(pi.translation + pi.rotation * m.dpar);
      poses[e.child] = pj;
    } else {
      const Pose& pj = poses[e.child];
      Pose pi;
      pi.rotation = pj.rotation * m.rel.transpose();
      pi.translation = m.dpar_in_child_axis ? Vec3(pj.translation - m.slide * pj.rotation.col(2))
                                            : Vec3(pj.translation - pi.rotation * m.dpar);
      poses[e.parent] = pi;
    }
  }
  return poses;
}

double edge_residual(const RobotGraph& g, const std::vector<Pose>& poses, const JointConfig& q,
                     int edge) {
  const JointEdge& e = g.edges[edge];
  EdgeMotion m = edge_motion(g, q, edge);
  const Pose& pi = poses[e.parent];
  const Pose& pj = poses[e.child];
  double rot = (pj.rotation - pi.rotation * m.rel).cwiseAbs().maxCoeff();
  Vec3 expect = m.dpar_in_child_axis ? Vec3(pi.translation + m.slide * (pi.rotation * m.rel).col(2))
                                     : Vec3(pi.translation + pi.rotation * m.dpar);
  double trans = (pj.translation - expect).cwiseAbs().maxCoeff();
  return std::max(rot, trans);
}

Pose propagate_path(const RobotGraph& g, const std::vector<Pose>& poses, const JointConfig& q,
                    const std::vector<int>& path) {
  Pose p = poses[path.front()];
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    int a = path[i], b = path[i + 1];
    int ei = -1;
    bool forward = true;
    for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
      if (g.edges[e].parent == a && g.edges[e].child == b) { ei = e; forward = true; break; }
      if (g.edges[e].child == a && g.edges[e].parent == b) { ei = e; forward = false; break; }
    }
    if (ei < 0) throw ModelError("propagate_path: no edge between path links");
    EdgeMotion m = edge_motion(g, q, ei);
    if (forward) {
      Pose next;
      next.rotation = p.rotation * m.rel;
      next.translation = m.dpar_in_child_axis ? Vec3(p.translation + m.slide * next.rotation.col(2))
                                              : Vec3(p.translation + p.rotation * m.dpar);
      p = next;
    } else {
      Pose prev;
      prev.rotation = p.rotation * m.rel.transpose();
      prev.translation = m.dpar_in_child_axis ? Vec3(p.translation - m.slide * p.rotation.col(2))
                                              : Vec3(p.translation - prev.rotation * m.dpar);
      p = prev;
    }
  }
  return p;
}

JointConfig sample_config(const RobotGraph& g, std::uint64_t seed) {
  Rng rng(seed);
  JointConfig q;
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    const JointEdge& je = g.edges[e];
    switch (je.kind) {
      case JointKind::Revolute:
        q.angles[e] = je.angle_limit <= 0 ? 0.0 : rng.uniform(-je.angle_limit, je.angle_limit);
        break;
      case JointKind::Prismatic:
        q.extensions[e] = rng.uniform();
        break;
      case JointKind::Spherical:
        q.sphericals[e] = random_rotation(rng);
        break;
    }
  }
  return q;
}

StewartAnchors stewart_anchors(const RobotGraph& g) {
  StewartAnchors sa;
  sa.legs = g.edges_of_kind(JointKind::Prismatic);
  if (sa.legs.size() != 6) throw ModelError("stewart: expected exactly 6 prismatic legs");
  for (int leg : sa.legs) {
    const JointEdge& pe = g.edges[leg];
    // lower link: spherical from a base link, with the base anchor offset
    const JointEdge* lower = nullptr;
    const JointEdge* upper = nullptr;
    for (const auto& e : g.edges) {
      if (e.kind != JointKind::Spherical) continue;
      if (e.child == pe.parent && g.is_base(e.parent)) lower = &e;
      if (e.child == pe.child && e.parent == g.end_effector) upper = &e;
    }
    if (!lower || !upper) {
      throw ModelError("stewart: leg " + std::to_string(leg) +
                       " is not (base -spherical- lower -prismatic- upper -spherical- platform)");
    }
    const Pose& bp = g.base_poses.at(lower->parent);
    sa.base.push_back(bp.translation + bp.rotation * lower->offset);
    sa.platform.push_back(upper->offset);
  }
  return sa;
}

std::vector<double> stewart_inverse_legs(const RobotGraph& g, const Pose& ee_pose) {
  StewartAnchors sa = stewart_anchors(g);
  std::vector<double> lengths;
  for (size_t i = 0; i < 6; ++i) {
    lengths.push_back((ee_pose.translation + ee_pose.rotation * sa.platform[i] - sa.base[i]).norm());
  }
  return lengths;
}

}  // namespace sdrik
