#pragma once

#include "bisim.hpp"
#include "chart.hpp"
#include "errors.hpp"
#include "lee.hpp"
#include "semantics.hpp"
#include "serialize.hpp"
#include "syntax.hpp"
#include "verify.hpp"
