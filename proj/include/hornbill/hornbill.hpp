#pragma once

#include <hornbill/config.hpp>
#include <hornbill/csv.hpp>
#include <hornbill/errors.hpp>
#include <hornbill/horn.hpp>
#include <hornbill/parallel.hpp>
#include <hornbill/quadrature.hpp>
#include <hornbill/random.hpp>
#include <hornbill/stats.hpp>
#include <hornbill/suspension.hpp>
#include <hornbill/svg.hpp>
#include <hornbill/table.hpp>
#include <hornbill/tangent.hpp>
