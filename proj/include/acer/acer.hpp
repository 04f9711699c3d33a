#ifndef ACER_ACER_HPP
#define ACER_ACER_HPP

#include "acer/config.hpp"
#include "acer/erc.hpp"
#include "acer/error.hpp"
#include "acer/image.hpp"
#include "acer/io.hpp"
#include "acer/metrics.hpp"
#include "acer/parallel.hpp"
#include "acer/phantom.hpp"
#include "acer/rician.hpp"
#include "acer/rng.hpp"
#include "acer/sampler.hpp"

#endif
