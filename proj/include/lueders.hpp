#pragma once

#include "lueders/config.hpp"
#include "lueders/matrix.hpp"
#include "lueders/linalg.hpp"
#include "lueders/random.hpp"
#include "lueders/effects.hpp"
#include "lueders/operation.hpp"
#include "lueders/witness.hpp"
#include "lueders/io.hpp"
