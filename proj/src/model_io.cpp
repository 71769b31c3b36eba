#include "gfe/model_io.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gfe::model_io {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("model JSON: expected a matrix");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) {
      throw std::invalid_argument("model JSON: ragged matrix rows");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v(k));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = j[k].get<double>();
  return v;
}

}  // namespace

std::string to_json(const ModelDocument& doc) {
  json j;
  j["format"] = "gfe-model/1";
  if (!doc.config_hash.empty()) j["config_hash"] = doc.config_hash;

  j["order"] = doc.model.n;
  j["inputs"] = doc.model.i;
  j["outputs"] = doc.model.j;
  j["ts_s"] = doc.model.ts_s;
  j["A"] = matrix_to_json(doc.model.A);
  j["B"] = matrix_to_json(doc.model.B);
  j["Gamma"] = matrix_to_json(doc.model.Gamma);
  j["C"] = matrix_to_json(doc.model.C);
  j["rls"] = {{"theta0", doc.theta0}, {"p0_scale", doc.p0_scale}};

  json feat;
  feat["window_ms"] = doc.window.length_ms;
  feat["increment_ms"] = doc.window.increment_ms;
  feat["channels"] = doc.channels;
  json names = json::array();
  for (Feature f : doc.features) names.push_back(feature_name(f));
  feat["features"] = names;
  json ranges = json::array();
  for (const NormRange& r : doc.norm_ranges) ranges.push_back({r.min, r.max});
  feat["norm_ranges"] = ranges;
  j["feature_config"] = feat;

  j["kf"]["enabled"] = doc.kf_enabled;
  if (doc.kf) {
    j["kf"]["L"] = vector_to_json(doc.kf->L);
    j["kf"]["P_kf"] = matrix_to_json(doc.kf->P_kf);
    j["kf"]["Q"] = matrix_to_json(doc.kf->noise.Q);
    j["kf"]["R"] = matrix_to_json(doc.kf->noise.R);
    j["kf"]["Q_kf"] = matrix_to_json(doc.kf->noise.Q_kf);
    j["kf"]["R_kf"] = matrix_to_json(doc.kf->noise.R_kf);
    j["kf"]["variance_floor"] = doc.kf->noise.variance_floor;
    j["kf"]["spectral_radius"] = doc.kf->spectral_radius;
    j["kf"]["stable"] = doc.kf->stable;
  }

  if (doc.order_selection) {
    json table = json::array();
    for (const auto& row : doc.order_selection->table) {
      json r = {{"order", row.order}};
      if (row.failed) {
        r["error"] = row.error;
      } else {
        r["aic"] = row.aic_value;
      }
      table.push_back(std::move(r));
    }
    j["order_selection"] = {{"selected", doc.order_selection->selected_order}, {"table", table}};
  }
  return j.dump(2) + "\n";
}

ModelDocument from_json(const std::string& json_text) {
  const json j = json::parse(json_text);
  if (j.value("format", "") != "gfe-model/1") {
    throw std::invalid_argument("model JSON: unsupported format tag");
  }

  ModelDocument doc;
  doc.config_hash = j.value("config_hash", "");
  doc.model.n = j.at("order").get<int>();
  doc.model.i = j.at("inputs").get<int>();
  doc.model.j = j.at("outputs").get<int>();
  doc.model.ts_s = j.at("ts_s").get<double>();
  doc.model.A = matrix_from_json(j.at("A"));
  doc.model.B = matrix_from_json(j.at("B"));
  doc.model.Gamma = matrix_from_json(j.at("Gamma"));
  doc.model.C = matrix_from_json(j.at("C"));
  doc.theta0 = j.at("rls").at("theta0").get<double>();
  doc.p0_scale = j.at("rls").at("p0_scale").get<double>();
  doc.model.validate();

  const json& feat = j.at("feature_config");
  doc.window.length_ms = feat.at("window_ms").get<double>();
  doc.window.increment_ms = feat.at("increment_ms").get<double>();
  doc.channels = feat.at("channels").get<std::vector<int>>();
  for (const auto& name : feat.at("features")) {
    doc.features.push_back(feature_from_name(name.get<std::string>()));
  }
  for (const auto& r : feat.at("norm_ranges")) {
    doc.norm_ranges.push_back({r[0].get<double>(), r[1].get<double>()});
  }

  doc.kf_enabled = j.at("kf").at("enabled").get<bool>();
  if (j.at("kf").contains("L")) {
    kalman::KalmanEstimator kf;
    kf.model = doc.model;
    kf.L = vector_from_json(j["kf"]["L"]);
    kf.P_kf = matrix_from_json(j["kf"]["P_kf"]);
    kf.noise.Q = matrix_from_json(j["kf"]["Q"]);
    kf.noise.R = matrix_from_json(j["kf"]["R"]);
    kf.noise.Q_kf = matrix_from_json(j["kf"]["Q_kf"]);
    kf.noise.R_kf = matrix_from_json(j["kf"]["R_kf"]);
    kf.noise.variance_floor = j["kf"].value("variance_floor", 1e-9);
    kf.spectral_radius = j["kf"].value("spectral_radius", 0.0);
    kf.stable = j["kf"].value("stable", false);
    doc.kf = std::move(kf);
  }

  if (j.contains("order_selection")) {
    ssid::OrderSelection sel;
    sel.selected_order = j["order_selection"].at("selected").get<int>();
    for (const auto& r : j["order_selection"].at("table")) {
      ssid::OrderSelection::Row row;
      row.order = r.at("order").get<int>();
      if (r.contains("error")) {
        row.failed = true;
        row.error = r["error"].get<std::string>();
      } else {
        row.aic_value = r.at("aic").get<double>();
      }
      sel.table.push_back(std::move(row));
    }
    doc.order_selection = std::move(sel);
  }
  return doc;
}

void save(const std::string& path, const ModelDocument& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << to_json(doc);
}

ModelDocument load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

}  // namespace gfe::model_io
