#pragma once

#include <string_view>

namespace sentiaug::text::data {

std::string_view stopwords_en();
std::string_view lexicon_es();
std::string_view lexicon_fr();
std::string_view lexicon_de();

}  // namespace sentiaug::text::data
