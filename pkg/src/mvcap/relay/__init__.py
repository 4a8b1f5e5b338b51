from .core import DEFAULT_RELAY_PORT, RelayCore, Session, SessionState
from .udp import UdpRelayServer
from .wire import HEADER_SIZE, Kind, RelayDatagram, trigger_datagram
