#pragma once

#include <string_view>

// Contents of the files under data/, compiled into the library.
namespace llmconf::embedded {

extern const std::string_view kStopwordsEn;
extern const std::string_view kNegationsEn;
extern const std::string_view kAbbreviationsEn;

}  // namespace llmconf::embedded
