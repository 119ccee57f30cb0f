#include <fstream>
#include <iomanip>
#include <ostream>

#include "json.hpp"
#include "ntlab/error.hpp"
#include "ntlab/transport.hpp"

namespace ntlab {

void write_plan_csv(const TransportPlan& plan, std::ostream& out) {
  out << "src_idx,dst_idx,mass\n" << std::setprecision(17);
  for (const auto& e : plan.entries) out << e.src << ',' << e.dst << ',' << e.mass << '\n';
}

std::string plan_header_json(const PlanHeader& header) {
  nlohmann::ordered_json j;
  j["cost"] = header.cost;
  j["gap"] = header.gap;
  j["metric"] = to_string(header.metric);
  j["src_atoms"] = header.src_atoms;
  j["dst_atoms"] = header.dst_atoms;
  return j.dump(2);
}

void save_plan(const TransportPlan& plan, const PlanHeader& header, const std::string& stem) {
  std::ofstream csv(stem + ".csv");
  std::ofstream json(stem + ".json");
  if (!csv || !json) throw Error(ErrorCode::IoError, "cannot write plan files at '" + stem + "'");
  write_plan_csv(plan, csv);
  json << plan_header_json(header) << '\n';
}

}  // namespace ntlab
