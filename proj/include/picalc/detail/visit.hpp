#ifndef PICALC_DETAIL_VISIT_HPP
#define PICALC_DETAIL_VISIT_HPP

namespace picalc::detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace picalc::detail

#endif
