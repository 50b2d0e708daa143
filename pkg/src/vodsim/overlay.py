"""Session management: arrival-window grouping, distribution trees, shortcuts."""

from __future__ import annotations

from dataclasses import dataclass, field

from .domain import SERVER, BufferCache, PlaybackRecord
from .transfer import TransferHistory


@dataclass
class Session:
    session_id: int
    window_start: float
    width: float
    members: set[int] = field(default_factory=set)
    tree: dict[int, int] = field(default_factory=dict)   # peer -> parent (or SERVER)

    def contains_time(self, t: float) -> bool:
        return self.window_start <= t < self.window_start + self.width


@dataclass
class Peer:
    peer_id: int
    arrival_time: float
    cache: BufferCache
    record: PlaybackRecord = field(default_factory=PlaybackRecord)
    session_id: int | None = None
    playhead: int = 0
    paused: bool = False
    departed: bool = False
    shortcut_neighbors: list[int] = field(default_factory=list)
    history: TransferHistory = field(default_factory=TransferHistory)

    @property
    def live(self) -> bool:
        return not self.departed


class Overlay:
    """Tracker-side view: every peer, every session, the distribution trees."""

    def __init__(self, session_width_s: float = 120.0, children_per_peer: int = 1):
        self.session_width_s = session_width_s
        self.children_per_peer = children_per_peer
        self.sessions: dict[int, Session] = {}
        self.peers: dict[int, Peer] = {}
        self._children: dict[int, list[int]] = {}

    # -- membership --------------------------------------------------------

    def assign_session(self, peer: Peer, latency_ms) -> Session:
        """Place an arriving peer in the session covering its arrival time.

        The tree parent is the member with spare forwarding capacity and the
        smallest path latency; the server adopts the peer otherwise.
        """
        if peer.session_id is not None:
            raise ValueError("peer %d already assigned" % peer.peer_id)
        idx = int(peer.arrival_time // self.session_width_s)
        session = self.sessions.get(idx)
        if session is None:
            session = Session(idx, idx * self.session_width_s, self.session_width_s)
            self.sessions[idx] = session

        candidates = [
            pid for pid in sorted(session.members)
            if self.peers[pid].live
            and len(self._children.get(pid, ())) < self.children_per_peer
        ]
        parent = SERVER
        if candidates:
            parent = min(candidates, key=lambda pid: (latency_ms(pid), pid))
        session.members.add(peer.peer_id)
        session.tree[peer.peer_id] = parent
        if parent != SERVER:
            self._children.setdefault(parent, []).append(peer.peer_id)
        peer.session_id = session.session_id
        self.peers[peer.peer_id] = peer
        return session

    def session_of(self, peer_id: int) -> Session:
        return self.sessions[self.peers[peer_id].session_id]

    def parent_of(self, peer_id: int) -> int:
        return self.session_of(peer_id).tree[peer_id]

    def live_members(self, session: Session, excluding: int | None = None) -> list[int]:
        return sorted(
            pid for pid in session.members
            if self.peers[pid].live and pid != excluding
        )

    def live_peers(self) -> list[int]:
        return sorted(pid for pid, p in self.peers.items() if p.live)

    # -- shortcuts ----------------------------------------------------------

    def refresh_shortcuts(self, peer: Peer, k: int, rng) -> list[int]:
        """Uniform sample of up to k live peers from other sessions."""
        if k < 0:
            raise ValueError("k must be >= 0")
        pool = [
            pid for pid in self.live_peers()
            if self.peers[pid].session_id != peer.session_id
        ]
        chosen = sorted(rng.sample(pool, k)) if len(pool) > k else pool
        peer.shortcut_neighbors = chosen
        return chosen

    def valid_shortcuts(self, peer: Peer) -> list[int]:
        """The live portion of a peer's shortcut list; own-session ids never appear."""
        return [
            pid for pid in peer.shortcut_neighbors
            if pid in self.peers and self.peers[pid].live
            and self.peers[pid].session_id != peer.session_id
        ]

    # -- churn --------------------------------------------------------------

    def handle_departure(self, peer: Peer) -> list[int]:
        """Remove a peer; its tree children are adopted by its parent."""
        if peer.departed:
            return []
        session = self.session_of(peer.peer_id)
        parent = session.tree[peer.peer_id]
        reparented = list(self._children.pop(peer.peer_id, ()))
        for child in reparented:
            session.tree[child] = parent
            if parent != SERVER:
                self._children.setdefault(parent, []).append(child)
        if parent != SERVER and peer.peer_id in self._children.get(parent, ()):
            self._children[parent].remove(peer.peer_id)
        session.members.discard(peer.peer_id)
        peer.departed = True
        return reparented

    def tree_is_acyclic(self, session: Session) -> bool:
        for start in session.tree:
            seen = set()
            node = start
            while node != SERVER:
                if node in seen:
                    return False
                seen.add(node)
                node = session.tree.get(node, SERVER)
        return True
