#pragma once

#include "grouprec/config.hpp"
#include "grouprec/domain.hpp"
#include "grouprec/event_log.hpp"
#include "grouprec/ibgr.hpp"
#include "grouprec/json_io.hpp"
#include "grouprec/leaderrank.hpp"
#include "grouprec/pair_matrix.hpp"
#include "grouprec/recipient.hpp"
#include "grouprec/recommender.hpp"
#include "grouprec/report.hpp"
#include "grouprec/sentiment.hpp"
#include "grouprec/session.hpp"
#include "grouprec/service.hpp"
#include "grouprec/similarity.hpp"
#include "grouprec/simulate.hpp"
#include "grouprec/termination.hpp"
#include "grouprec/trust.hpp"
