"""Clients for external engines: GTP for Go, line-delimited JSON for Doudizhu policies."""
from .gtp import (AnalysisConfig, AnalysisRecord, EngineError, GtpSession, HandshakeTimeout, MoveCandidate,
                  ProtocolError, gtp_play_and_analyze, gtp_session, parse_analysis_line)
from .policy import PolicyClient, UnknownActionInResponse, policy_query
from .transport import (BridgeError, ConnectFailed, EngineEndpoint, LineChannel, MalformedResponse,
                        ResponseTimeout, Transport)
