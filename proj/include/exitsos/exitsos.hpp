#pragma once

#include "exitsos/bounds.hpp"
#include "exitsos/certificates.hpp"
#include "exitsos/conic_program.hpp"
#include "exitsos/extrema.hpp"
#include "exitsos/generator.hpp"
#include "exitsos/hierarchy.hpp"
#include "exitsos/level_report.hpp"
#include "exitsos/oracle.hpp"
#include "exitsos/polynomial.hpp"
#include "exitsos/problem_io.hpp"
#include "exitsos/random.hpp"
#include "exitsos/sdp_solver.hpp"
#include "exitsos/serialization.hpp"
#include "exitsos/sphere_map.hpp"
#include "exitsos/trig_polynomial.hpp"
