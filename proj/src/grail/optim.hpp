// Copyright 2026 The GRAIL Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <vector>

#include "grail/autodiff.hpp"

namespace grail {

// Adam with bias correction. Holds pointers; the parameters must outlive it.
class Adam {
 public:
  explicit Adam(std::vector<Parameter*> params, double lr, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);

  void zero_grad();
  void step();
  int steps() const { return t_; }
  double lr() const { return lr_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  double lr_, beta1_, beta2_, eps_;
  int t_ = 0;
};

template <typename... Lists>
std::vector<Parameter*> collect_parameters(Lists&... lists) {
  std::vector<Parameter*> out;
  (([&] {
     for (auto& p : lists) out.push_back(&p);
   }()),
   ...);
  return out;
}

}  // namespace grail
