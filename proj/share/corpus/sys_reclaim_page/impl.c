int sys_reclaim_page(pn_t pn) {
    struct page *page;
    struct proc *proc;

    if (!is_pn_valid(pn))
        return -EINVAL;
    page = get_page(pn);
    if (page->owner != current)
        return -EACCES;
    proc = get_proc(current);
    proc->nr_pages -= 1;
    if (page->type != PAGE_TYPE_FRAME)
        return -EINVAL;

    page->type = PAGE_TYPE_FREE;
    page->owner = 0;
    page->refcnt = page->refcnt - 1;
    return 0;
}
