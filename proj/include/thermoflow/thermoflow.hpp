#pragma once

#include <thermoflow/calibration.hpp>
#include <thermoflow/centrality.hpp>
#include <thermoflow/error.hpp>
#include <thermoflow/flow.hpp>
#include <thermoflow/graph.hpp>
#include <thermoflow/io.hpp>
#include <thermoflow/solver.hpp>
