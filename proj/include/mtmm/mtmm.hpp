#ifndef MTMM_MTMM_HPP
#define MTMM_MTMM_HPP

#include "array.hpp"
#include "cavity.hpp"
#include "membrane.hpp"
#include "optomech.hpp"
#include "tmm.hpp"

#endif  // MTMM_MTMM_HPP
