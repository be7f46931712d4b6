#include "farm/nn/parameters.hpp"

#include <cmath>

#include "farm/core/error.hpp"
#include "farm/core/hash.hpp"

namespace farm::nn {

Parameter& ParameterSet::create(const std::string& name, Index rows, Index cols) {
  require(!contains(name), "duplicate parameter name '" + name + "'");
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->value = Matrix::Zero(rows, cols);
  p->grad = Matrix::Zero(rows, cols);
  Parameter& ref = *p;
  index_[name] = &ref;
  params_.push_back(std::move(p));
  return ref;
}

Parameter& ParameterSet::get(const std::string& name) {
  const auto it = index_.find(name);
  if (it == index_.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  return *it->second;
}

const Parameter& ParameterSet::get(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  return *it->second;
}

std::vector<Parameter*> ParameterSet::all() {
  std::vector<Parameter*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Parameter*> ParameterSet::all() const {
  std::vector<const Parameter*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<Parameter*> ParameterSet::with_prefix(const std::string& prefix) {
  std::vector<Parameter*> out;
  for (auto& p : params_) {
    if (p->name.rfind(prefix, 0) == 0) out.push_back(p.get());
  }
  return out;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p->grad.setZero();
}

void ParameterSet::set_frozen(const std::string& prefix, bool frozen) {
  for (auto* p : with_prefix(prefix)) p->frozen = frozen;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

bool ParameterSet::all_finite() const {
  for (const auto& p : params_) {
    if (!p->value.allFinite()) return false;
  }
  return true;
}

std::string ParameterSet::checksum(const std::string& prefix) const {
  Fnv1a h;
  for (const auto& p : params_) {
    if (p->name.rfind(prefix, 0) != 0) continue;
    h.update(p->name);
    h.update(std::as_bytes(std::span<const double>(p->value.data(), static_cast<std::size_t>(p->value.size()))));
  }
  return h.hex();
}

}  // namespace farm::nn
