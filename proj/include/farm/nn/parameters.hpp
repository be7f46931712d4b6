#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "farm/nn/tensor.hpp"

namespace farm::nn {

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool frozen = false;
};

/// Named parameters in creation order.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;
  ParameterSet(ParameterSet&&) = default;
  ParameterSet& operator=(ParameterSet&&) = default;

  Parameter& create(const std::string& name, Index rows, Index cols);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  /// Parameters whose name starts with prefix.
  std::vector<Parameter*> with_prefix(const std::string& prefix);

  void zero_grad();
  void set_frozen(const std::string& prefix, bool frozen);
  std::size_t scalar_count() const;
  bool all_finite() const;
  /// Hash over names and raw values of parameters under prefix.
  std::string checksum(const std::string& prefix = "") const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, Parameter*> index_;
};

}  // namespace farm::nn
