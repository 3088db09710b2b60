#pragma once

#include <easyrca/anomaly.hpp>
#include <easyrca/dataset.hpp>
#include <easyrca/effects.hpp>
#include <easyrca/engine.hpp>
#include <easyrca/error.hpp>
#include <easyrca/graph.hpp>
#include <easyrca/io.hpp>
#include <easyrca/report.hpp>
#include <easyrca/separation.hpp>
#include <easyrca/simgen.hpp>
