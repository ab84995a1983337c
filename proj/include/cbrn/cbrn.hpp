#ifndef CBRN_CBRN_HPP
#define CBRN_CBRN_HPP

#include "cbrn/archive.hpp"
#include "cbrn/learning.hpp"
#include "cbrn/manifest.hpp"
#include "cbrn/model.hpp"
#include "cbrn/pattern.hpp"
#include "cbrn/recall.hpp"

#endif
