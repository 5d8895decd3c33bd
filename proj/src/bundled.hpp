#pragma once

#include <string_view>

// Data files compiled into the library (generated at configure time).
namespace erblock::bundled {

std::string_view phonetic() noexcept;
std::string_view letterform() noexcept;
std::string_view keyboard() noexcept;
std::string_view names() noexcept;
std::string_view governorates() noexcept;

}  // namespace erblock::bundled
