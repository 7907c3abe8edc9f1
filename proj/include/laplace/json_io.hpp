#pragma once

#include "laplace/sym_tensor.hpp"

#include <json.hpp>

namespace laplace {

using Json = nlohmann::json;

// {order, dim, entries: [[[a1..ad], value], ...]}; exact values are written as "p/q" strings.
template <Scalar S>
Json tensor_to_json(const BasicSymTensor<S>& t) {
  Json entries = Json::array();
  t.for_each([&](std::span<const int> e, const S& v) {
    Json idx(std::vector<int>(e.begin(), e.end()));
    if constexpr (is_exact_v<S>)
      entries.push_back(Json::array({idx, v.get_str()}));
    else
      entries.push_back(Json::array({idx, v}));
  });
  return Json{{"order", t.order()}, {"dim", t.dim()}, {"entries", entries}};
}

template <Scalar S>
BasicSymTensor<S> tensor_from_json(const Json& j) {
  BasicSymTensor<S> t(j.at("order").get<int>(), j.at("dim").get<int>());
  for (const auto& entry : j.at("entries")) {
    MultiIndex a(entry.at(0).get<std::vector<int>>());
    const Json& v = entry.at(1);
    if constexpr (is_exact_v<S>) {
      t.at(a) = v.is_string() ? parse_rational(v.get<std::string>()) : Rational(v.get<double>());
    } else {
      t.at(a) = v.is_string() ? to_double(parse_rational(v.get<std::string>())) : v.get<double>();
    }
  }
  return t;
}

}  // namespace laplace
