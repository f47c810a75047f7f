def sys_dup(old, fd, newfd):
    cond = z3.And(
        z3.ULT(fd, dt.NOFILE),
        z3.ULT(newfd, dt.NOFILE),
        old.procs[old.current].offs(newfd) == 0)

    new = old.copy()
    new.procs[old.current].offs[newfd] = old.procs[old.current].offs(fd)
    return cond, util.If(cond, new, old)
